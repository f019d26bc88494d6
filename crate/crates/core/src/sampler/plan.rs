use std::fmt::Write as _;
use std::time::Duration;

use crate::error::{Error, Result};

/// One exposure of an `r x r` detector array (or a single pixel when `r = 1`).
///
/// The array spans a `side x side` area anchored at its top-left pixel and
/// samples it with stride `side / r`; `side = r` is the native footprint and
/// `side = 2r` the zoomed-out one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub anchor: usize,
    pub side: usize,
    pub dwell: Duration,
}

/// Scan locations and dwell times for one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanPlan {
    pub iteration: u64,
    /// Detector array side `r`.
    pub array: usize,
    pub placements: Vec<Placement>,
}

impl ScanPlan {
    pub fn new(iteration: u64, array: usize) -> Self {
        ScanPlan { iteration, array, placements: Vec::new() }
    }

    /// Pixel-wise plan with one placement per pixel.
    pub fn pixels(iteration: u64, pixels: &[usize], dwell: &[Duration]) -> Self {
        ScanPlan {
            iteration,
            array: 1,
            placements: pixels
                .iter()
                .zip(dwell)
                .map(|(&anchor, &dwell)| Placement { anchor, side: 1, dwell })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// Pixels covered by one placement on a `rows x cols` grid. Positions
    /// outside the grid are dropped.
    pub fn covered(&self, placement: &Placement, rows: usize, cols: usize) -> Vec<usize> {
        let r = self.array;
        let stride = (placement.side / r).max(1);
        let (ar, ac) = (placement.anchor / cols, placement.anchor % cols);
        let mut out = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let (pr, pc) = (ar + i * stride, ac + j * stride);
                if pr < rows && pc < cols {
                    out.push(pr * cols + pc);
                }
            }
        }
        out
    }

    /// Every `(pixel, dwell)` exposure of the plan, in placement order.
    pub fn exposures(&self, rows: usize, cols: usize) -> Vec<(usize, Duration)> {
        self.placements
            .iter()
            .flat_map(|p| self.covered(p, rows, cols).into_iter().map(move |n| (n, p.dwell)))
            .collect()
    }

    /// Total number of scanned pixel positions.
    pub fn scanned_points(&self, rows: usize, cols: usize) -> usize {
        self.placements.iter().map(|p| self.covered(p, rows, cols).len()).sum()
    }

    /// Plain-text audit lines: `iteration pixel side dwell_s`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.placements {
            let _ = writeln!(out, "{} {} {} {:.9}", self.iteration, p.anchor, p.side, p.dwell.as_secs_f64());
        }
        out
    }

    /// Parses lines produced by [`ScanPlan::to_text`]. All lines must share
    /// one iteration.
    pub fn from_text(text: &str, array: usize) -> Result<Self> {
        let mut plan: Option<ScanPlan> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::malformed("scan plan", format!("line {}: `{line}`", lineno + 1));
            if fields.len() != 4 {
                return Err(bad());
            }
            let iteration: u64 = fields[0].parse().map_err(|_| bad())?;
            let anchor: usize = fields[1].parse().map_err(|_| bad())?;
            let side: usize = fields[2].parse().map_err(|_| bad())?;
            let dwell = parse_seconds(fields[3]).ok_or_else(bad)?;
            if dwell.is_zero() {
                return Err(bad());
            }
            let plan = plan.get_or_insert_with(|| ScanPlan::new(iteration, array));
            if plan.iteration != iteration {
                return Err(bad());
            }
            plan.placements.push(Placement { anchor, side, dwell });
        }
        Ok(plan.unwrap_or_else(|| ScanPlan::new(0, array)))
    }
}

/// Decimal seconds to a `Duration` without a floating-point round trip.
fn parse_seconds(tok: &str) -> Option<Duration> {
    let (whole, frac) = tok.split_once('.').unwrap_or((tok, ""));
    if frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        let secs: f64 = tok.parse().ok()?;
        return Duration::try_from_secs_f64(secs).ok();
    }
    let secs: u64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
    let nanos: u32 = format!("{frac:0<9}").parse().ok()?;
    Some(Duration::new(secs, nanos))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoomed_out_array_uses_stride_two() {
        let mut plan = ScanPlan::new(0, 2);
        plan.placements.push(Placement { anchor: 0, side: 4, dwell: Duration::from_micros(300) });
        assert_eq!(plan.covered(&plan.placements[0], 8, 8), vec![0, 2, 16, 18]);
        plan.placements[0].side = 2;
        assert_eq!(plan.covered(&plan.placements[0], 8, 8), vec![0, 1, 8, 9]);
    }

    #[test]
    fn text_round_trip() {
        let plan = ScanPlan::pixels(3, &[5, 9], &[Duration::from_micros(300), Duration::from_micros(450)]);
        let back = ScanPlan::from_text(&plan.to_text(), 1).unwrap();
        assert_eq!(back, plan);
        assert!(ScanPlan::from_text("1 2 3\n", 1).is_err());
    }
}
