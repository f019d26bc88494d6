use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Thresholds ending the adaptive loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopCriteria {
    /// RMSE (bins) between consecutive depth maps.
    pub xi: f64,
    /// Acquisition budget per pixel.
    #[serde(with = "crate::config::secs")]
    pub max_dwell: Duration,
    pub max_points: usize,
    pub max_iterations: u64,
    /// Ends an experiment once the depth RMSE against the reference drops to
    /// this many bins. Only meaningful when a reference is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_rmse: Option<f64>,
}

/// Progress of the loop as seen by [`check_stop`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoopState {
    /// Iterations completed.
    pub iteration: u64,
    /// Scanned positions so far, repeats included.
    pub scanned_points: usize,
    /// Pixels whose accumulated dwell reached the budget.
    pub exhausted_pixels: usize,
    pub pixels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    MaxPoints,
    MaxDwell,
    ScanComplete,
    ReferenceReached,
}

impl StopReason {
    /// Whether the run ended because its estimates settled rather than
    /// because a budget ran out.
    pub fn converged(self) -> bool {
        matches!(self, StopReason::Converged | StopReason::ReferenceReached)
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max_iterations",
            StopReason::MaxPoints => "max_points",
            StopReason::MaxDwell => "max_dwell",
            StopReason::ScanComplete => "scan_complete",
            StopReason::ReferenceReached => "reference_reached",
        };
        f.write_str(s)
    }
}

/// Root-mean-square difference of two maps.
pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

/// First criterion that fires, checked in the order convergence, iterations,
/// points, dwell.
pub fn check_stop(d_prev: Option<&[f64]>, d_curr: &[f64], state: &LoopState, crit: &StopCriteria) -> Option<StopReason> {
    if let Some(prev) = d_prev {
        if rmse(prev, d_curr) <= crit.xi {
            return Some(StopReason::Converged);
        }
    }
    if state.iteration >= crit.max_iterations {
        return Some(StopReason::MaxIterations);
    }
    if state.scanned_points >= crit.max_points {
        return Some(StopReason::MaxPoints);
    }
    if state.pixels > 0 && state.exhausted_pixels >= state.pixels {
        return Some(StopReason::MaxDwell);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crit() -> StopCriteria {
        StopCriteria { xi: 0.5, max_dwell: Duration::from_millis(10), max_points: 1000, max_iterations: 5, reference_rmse: None }
    }

    #[test]
    fn identical_maps_converge() {
        let d = vec![3.0; 16];
        assert_eq!(check_stop(Some(&d), &d, &LoopState::default(), &crit()), Some(StopReason::Converged));
    }

    #[test]
    fn one_bin_everywhere_continues() {
        let a = vec![3.0; 16];
        let b = vec![4.0; 16];
        assert_eq!(rmse(&a, &b), 1.0);
        assert_eq!(check_stop(Some(&a), &b, &LoopState::default(), &crit()), None);
    }

    #[test]
    fn budgets_fire() {
        let d = vec![0.0; 4];
        let st = LoopState { iteration: 5, ..Default::default() };
        assert_eq!(check_stop(None, &d, &st, &crit()), Some(StopReason::MaxIterations));
        let st = LoopState { iteration: 1, scanned_points: 1000, ..Default::default() };
        assert_eq!(check_stop(None, &d, &st, &crit()), Some(StopReason::MaxPoints));
        let st = LoopState { iteration: 1, exhausted_pixels: 4, pixels: 4, ..Default::default() };
        assert_eq!(check_stop(None, &d, &st, &crit()), Some(StopReason::MaxDwell));
    }
}
