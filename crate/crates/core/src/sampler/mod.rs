//! Scan-location selection, dwell assignment, time-step control, timing and
//! stopping rules.

mod arrays;
mod dwell;
mod mh;
mod plan;
mod scenario;
mod stop;
mod timestep;
mod timing;

pub use arrays::{place_arrays, ArrayChoice};
pub use dwell::assign_dwell;
pub use mh::{mh_sample_locations, MhChain, MhConfig};
pub use plan::{Placement, ScanPlan};
pub use scenario::{Sampler, ScanScenario};
pub use stop::{check_stop, rmse, LoopState, StopCriteria, StopReason};
pub use timestep::{adapt_time_step, TimeStepController, DETECTION_BAND};
pub use timing::{acquisition_time, elapsed_time, move_time, ScanMode};
