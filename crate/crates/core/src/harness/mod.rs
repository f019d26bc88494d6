//! End-to-end experiments: adaptive sampling, static baselines, metrics and
//! traces.

mod experiment;
mod metrics;
pub mod presets;
mod source;
mod sweep;
mod trace;
mod xcorr;

use rayon::prelude::*;

pub use experiment::{run_adaptive, run_static, ExperimentConfig, ProcessingModel, ReconstructionConfig, StaticStrategy};
pub use metrics::{bins_to_metres, depth_rmse, metrics, ConfusionMatrix, Metrics, ReferenceMaps, SPEED_OF_LIGHT};
pub use source::RecordedSource;
pub use sweep::{rescale, sweep, SweepPoint};
pub use trace::{ExperimentTrace, Snapshot, TraceRow};
pub use xcorr::{xcorr_depth, XcorrFilter, LOG_IRF_FLOOR};

/// Runs `f` for `count` replicate seeds derived from `seed`, in parallel.
pub fn replicates<T: Send>(seed: u64, count: usize, f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    (0..count as u64).into_par_iter().map(|i| f(crate::rng::replicate_seed(seed, i))).collect()
}

/// Median of the values, `NaN`-free input assumed.
pub fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    crate::reconstruct::median(&mut v)
}
