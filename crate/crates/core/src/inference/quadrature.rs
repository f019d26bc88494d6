use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Log-spaced trapezoid rule for integrals over the signal-to-background
/// ratio `ω ∈ (0, ∞)`.
///
/// Nodes are `ω_j = ω_min (ω_max/ω_min)^{j/(J-1)}`; weights integrate with
/// respect to `dω` (trapezoid in `ln ω`, so `w_j = h ω_j`, halved at the
/// ends). The parts of the integral below `ω_min` and above `ω_max` are added
/// back by power-law extrapolation of the integrand when `tails` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    nodes: Vec<f64>,
    ln_nodes: Vec<f64>,
    ln_weights: Vec<f64>,
    tails: bool,
}

/// Serializable description of a [`QuadratureSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub nodes: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(default = "default_tails")]
    pub tails: bool,
}

fn default_tails() -> bool {
    true
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 64, omega_min: 1e-3, omega_max: 1e3, tails: true }
    }
}

impl QuadratureSpec {
    pub const MIN_NODES: usize = 16;

    pub fn log_spaced(nodes: usize, omega_min: f64, omega_max: f64) -> Result<Self> {
        if nodes < Self::MIN_NODES {
            return Err(Error::invalid("quadrature.nodes", format!("{nodes} < {}", Self::MIN_NODES)));
        }
        if !(omega_min > 0.0 && omega_max > omega_min && omega_max.is_finite()) {
            return Err(Error::invalid(
                "quadrature bounds",
                format!("need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"),
            ));
        }
        let (a, b) = (omega_min.ln(), omega_max.ln());
        let h = (b - a) / (nodes - 1) as f64;
        let ln_nodes: Vec<f64> = (0..nodes).map(|j| a + h * j as f64).collect();
        let ln_weights = ln_nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let end = if j == 0 || j == nodes - 1 { 0.5f64.ln() } else { 0.0 };
                h.ln() + x + end
            })
            .collect();
        Ok(QuadratureSpec {
            nodes: ln_nodes.iter().map(|x| x.exp()).collect(),
            ln_nodes,
            ln_weights,
            tails: true,
        })
    }

    pub fn from_config(cfg: &QuadratureConfig) -> Result<Self> {
        Ok(Self::log_spaced(cfg.nodes, cfg.omega_min, cfg.omega_max)?.with_tails(cfg.tails))
    }

    pub fn with_tails(mut self, tails: bool) -> Self {
        self.tails = tails;
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn ln_nodes(&self) -> &[f64] {
        &self.ln_nodes
    }

    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    pub fn tails(&self) -> bool {
        self.tails
    }

    pub fn omega_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn omega_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// `ln ∫ f(ω) dω` from `ln f` at the nodes.
    pub fn integrate_ln(&self, ln_f: &[f64], ln_tail_exponent_low: f64) -> f64 {
        debug_assert_eq!(ln_f.len(), self.len());
        self.integrate_ln_with(|j| ln_f[j], ln_tail_exponent_low)
    }

    /// Same as [`integrate_ln`](Self::integrate_ln) with `ln f(ω_j)` supplied
    /// by a closure, evaluated twice per node.
    pub fn integrate_ln_with(&self, ln_f: impl Fn(usize) -> f64, ln_tail_exponent_low: f64) -> f64 {
        let j_max = self.len();
        let mut m = f64::NEG_INFINITY;
        for j in 0..j_max {
            m = m.max(ln_f(j) + self.ln_weights[j]);
        }
        let (lo, hi) = if self.tails {
            self.tail_terms(ln_f(0), ln_f(j_max - 2), ln_f(j_max - 1), ln_tail_exponent_low)
        } else {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        };
        m = m.max(lo).max(hi);
        if m == f64::NEG_INFINITY || m.is_nan() {
            return m;
        }
        let mut acc = (lo - m).exp() + (hi - m).exp();
        for j in 0..j_max {
            acc += (ln_f(j) + self.ln_weights[j] - m).exp();
        }
        m + acc.ln()
    }

    /// Log contributions of `(0, ω_min)` and `(ω_max, ∞)`.
    ///
    /// Below `ω_min` the integrand behaves as `ω^{a-1}` with `a =
    /// exp(ln_a)`; above `ω_max` the local log-slope of the last two nodes is
    /// extended, and ignored when it does not decay faster than `1/ω`.
    #[inline]
    pub fn tail_terms(&self, ln_f_first: f64, ln_f_penultimate: f64, ln_f_last: f64, ln_a: f64) -> (f64, f64) {
        let lo = ln_f_first + self.ln_nodes[0] - ln_a;
        let j = self.len() - 1;
        let slope = (ln_f_last - ln_f_penultimate) / (self.ln_nodes[j] - self.ln_nodes[j - 1]);
        let hi = if slope < -1.0 {
            ln_f_last + self.ln_nodes[j] - (-slope - 1.0).max(0.05).ln()
        } else {
            f64::NEG_INFINITY
        };
        (lo, hi)
    }
}

/// `ln Σ exp(x_i)`, `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_specs() {
        assert!(QuadratureSpec::log_spaced(15, 1e-3, 1e3).is_err());
        assert!(QuadratureSpec::log_spaced(64, 0.0, 1e3).is_err());
        assert!(QuadratureSpec::log_spaced(64, 1.0, 1.0).is_err());
    }

    #[test]
    fn integrates_a_log_normal_bump() {
        // ∫ exp(-(ln ω)^2 / 2) dω / ω = √(2π)
        let q = QuadratureSpec::log_spaced(64, 1e-3, 1e3).unwrap();
        let ln_f: Vec<f64> = q.ln_nodes().iter().map(|&x| -0.5 * x * x - x).collect();
        let got = q.integrate_ln(&ln_f, 0.0).exp();
        assert!((got - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9, "{got}");
    }

    #[test]
    fn tails_recover_power_law_mass() {
        // f(ω) = ω / (1 + ω)^3 integrates to 1/2 over (0, ∞)
        let q = QuadratureSpec::log_spaced(64, 1e-3, 1e3).unwrap();
        let ln_f: Vec<f64> = q.nodes().iter().map(|&w| w.ln() - 3.0 * (1.0 + w).ln()).collect();
        let with = q.integrate_ln(&ln_f, 2f64.ln()).exp();
        let without = q.clone().with_tails(false).integrate_ln(&ln_f, 2f64.ln()).exp();
        assert!((with - 0.5).abs() < 1e-5, "{with}");
        assert!((without - 0.5).abs() > 1e-4);
    }

    #[test]
    fn positive_weights_and_bounds() {
        let q = QuadratureSpec::log_spaced(16, 0.1, 10.0).unwrap();
        assert!(q.ln_weights().iter().all(|w| w.is_finite()));
        assert!((q.omega_min() - 0.1).abs() < 1e-15);
        assert!((q.omega_max() - 10.0).abs() < 1e-12);
    }
}
