//! Per-pixel Bayesian classification and depth estimation.

mod engine;
mod hyper;
mod marginal;
mod matched_filter;
mod quadrature;

pub use engine::{argmax_first, decide_label, ncd, softmax, Engine, InferenceConfig, PixelEstimate};
pub use hyper::{ClassTerms, Hyperparameters};
pub use marginal::{
    class_log_marginal_empty, class_log_marginal_k, class_log_marginal_k_l, direct_score, ln_integrand,
    log_norm_gamma_l, omega_map, photon_total, ChannelEvidence,
};
pub use matched_filter::{log_kernel, matched_filter_log_scores, Correlator, MatchedFilterBank};
pub use quadrature::{log_sum_exp, QuadratureConfig, QuadratureSpec};
