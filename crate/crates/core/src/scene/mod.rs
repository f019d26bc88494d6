//! Ground-truth scenes, instrument responses, spectral libraries and the
//! histogram cube shared by simulation and inference.

mod cube;
mod irf;
mod library;
mod phantom;

pub use cube::{HistogramCube, CUBE_MAGIC};
pub use irf::Irf;
pub use library::SpectralLibrary;
pub use phantom::{build_phantom, sbr_of, GroundTruthScene, PhantomSpec, Primitive, Shape};
