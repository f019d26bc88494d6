//! Multispectral single-photon LiDAR: Poisson histogram simulation,
//! per-pixel Bayesian classification and depth estimation, inpainting, and
//! task-driven adaptive scanning benchmarked against static strategies.

pub mod config;
pub mod error;
pub mod harness;
pub mod inference;
pub mod reconstruct;
pub mod rng;
pub mod sampler;
pub mod scene;
pub mod simulate;

pub use config::{RunConfig, Strategy};
pub use error::{Error, Result};
pub use harness::{run_adaptive, run_static, ExperimentConfig, ExperimentTrace, ReferenceMaps, StaticStrategy};
pub use inference::{Engine, InferenceConfig, PixelEstimate};
pub use sampler::{ScanMode, ScanPlan, ScanScenario, StopCriteria, StopReason};
pub use scene::{GroundTruthScene, HistogramCube, Irf, PhantomSpec, SpectralLibrary};
pub use simulate::{PhotonSource, Simulator};
