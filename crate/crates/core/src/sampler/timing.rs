use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::plan::ScanPlan;

/// Whether placements are exposed one after another or all at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Sequential,
    Parallel,
}

/// Acquisition time of a plan: summed dwell in sequential mode, the longest
/// dwell in parallel mode.
pub fn acquisition_time(plan: &ScanPlan, mode: ScanMode) -> Duration {
    match mode {
        ScanMode::Sequential => plan.placements.iter().map(|p| p.dwell).sum(),
        ScanMode::Parallel => plan.placements.iter().map(|p| p.dwell).max().unwrap_or_default(),
    }
}

/// Mirror travel: one move per placement in sequential mode, a single move
/// in parallel mode.
pub fn move_time(plan: &ScanPlan, mode: ScanMode, mirror_move: Duration) -> Duration {
    if plan.is_empty() {
        return Duration::ZERO;
    }
    match mode {
        ScanMode::Sequential => mirror_move * plan.placements.len() as u32,
        ScanMode::Parallel => mirror_move,
    }
}

/// Acquisition plus mirror travel.
pub fn elapsed_time(plan: &ScanPlan, mode: ScanMode, mirror_move: Duration) -> Duration {
    acquisition_time(plan, mode) + move_time(plan, mode, mirror_move)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Placement;

    #[test]
    fn parallel_never_exceeds_sequential() {
        let mut plan = ScanPlan::new(0, 2);
        for (i, us) in [300, 600, 450].into_iter().enumerate() {
            plan.placements.push(Placement { anchor: 2 * i, side: 2, dwell: Duration::from_micros(us) });
        }
        let mv = Duration::from_micros(150);
        assert_eq!(elapsed_time(&plan, ScanMode::Sequential, mv), Duration::from_micros(1350 + 450));
        assert_eq!(elapsed_time(&plan, ScanMode::Parallel, mv), Duration::from_micros(750));
        assert_eq!(elapsed_time(&ScanPlan::new(0, 1), ScanMode::Parallel, mv), Duration::ZERO);
    }
}
