use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Lower and upper edge of the targeted detection fraction.
pub const DETECTION_BAND: (f64, f64) = (0.7, 0.9);

/// `t_0` doubled below the band, halved above it (never below `min`).
pub fn adapt_time_step(detect_fraction: f64, t0: Duration, min: Duration) -> Duration {
    let (lo, hi) = DETECTION_BAND;
    if detect_fraction < lo {
        t0 * 2
    } else if detect_fraction > hi {
        (t0 / 2).max(min)
    } else {
        t0
    }
}

/// Closed-loop controller around [`adapt_time_step`].
///
/// Each reversal of direction square-roots the step factor, so the loop
/// settles inside the band even when it is narrower than one doubling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStepController {
    pub t0: Duration,
    pub min: Duration,
    pub max: Duration,
    factor: f64,
    last: i8,
}

impl TimeStepController {
    pub fn new(t0: Duration, min: Duration, max: Duration) -> Self {
        TimeStepController { t0: t0.clamp(min, max), min, max, factor: 2.0, last: 0 }
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn update(&mut self, detect_fraction: f64) -> Duration {
        let (lo, hi) = DETECTION_BAND;
        let dir: i8 = if detect_fraction < lo {
            1
        } else if detect_fraction > hi {
            -1
        } else {
            0
        };
        if dir == 0 {
            return self.t0;
        }
        if self.last != 0 && dir != self.last {
            self.factor = self.factor.sqrt().max(1.01);
        }
        self.last = dir;
        let base = self.t0.as_nanos() as f64;
        let next = if dir > 0 { base * self.factor } else { base / self.factor };
        self.t0 = Duration::from_nanos(next.round() as u64).clamp(self.min, self.max);
        self.t0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_rule() {
        let t0 = Duration::from_micros(300);
        let min = Duration::from_micros(10);
        assert_eq!(adapt_time_step(0.8, t0, min), t0);
        assert_eq!(adapt_time_step(0.5, t0, min), 2 * t0);
        assert_eq!(adapt_time_step(0.95, t0, min), t0 / 2);
        assert_eq!(adapt_time_step(0.95, min, min), min);
    }

    #[test]
    fn controller_damps_oscillation() {
        // detection fraction 1 - exp(-t / 1 ms); doubling from 1.18 ms jumps
        // straight over the band
        let frac = |t: Duration| 1.0 - (-t.as_secs_f64() / 1e-3).exp();
        let t0 = Duration::from_micros(1180);
        assert!(frac(t0) < 0.7 && frac(2 * t0) > 0.9);
        let mut c = TimeStepController::new(t0, Duration::from_micros(1), Duration::from_secs(1));
        let mut inside = false;
        for _ in 0..10 {
            let f = frac(c.t0);
            if (0.7..=0.9).contains(&f) {
                inside = true;
                break;
            }
            c.update(f);
        }
        assert!(inside, "{:?}", c);
    }
}
