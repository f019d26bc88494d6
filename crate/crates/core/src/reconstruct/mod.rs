//! Dense maps from sparse per-pixel estimates, and the sampling map built
//! from them.

mod export;
mod field;
mod inpaint;
mod roi;

pub use export::{matrix_text, pgm16, write_matrix, write_pgm16};
pub use field::{DenseField, SparseField};
pub use inpaint::{inpaint, inpaint_labels, inpaint_with, median, mode, FillRule};
pub use roi::{build_roi, RoiConfig, RoiMap};
