//! Per-wavelength marginal likelihoods with the background integrated out
//! analytically and the signal-to-background ratio `ω` by quadrature.

use statrs::function::gamma::ln_gamma;

use super::hyper::{ClassTerms, Hyperparameters};
use super::matched_filter::{log_kernel, Correlator, MatchedFilterBank};
use super::quadrature::{log_sum_exp, QuadratureSpec};
use crate::error::{Error, Result};
use crate::scene::Irf;

/// Total count of a channel.
pub fn photon_total(y: &[u32]) -> f64 {
    y.iter().map(|&c| c as f64).sum()
}

/// `ln γ_l = ln Γ(α^b) - α^b ln β^b + Σ_t ln y_t!`.
pub fn log_norm_gamma_l(y: &[u32], hp: &Hyperparameters, l: usize) -> f64 {
    let (a, b) = (hp.alpha_b(l), hp.beta_b(l));
    let fact: f64 = y.iter().filter(|&&c| c > 1).map(|&c| ln_gamma(c as f64 + 1.0)).sum();
    ln_gamma(a) - a * b.ln() + fact
}

/// `ln [p(u=0) Γ(ȳ + α^b) / ((T + β^b)^{ȳ + α^b} γ_l)]`.
pub fn class_log_marginal_empty(y: &[u32], hp: &Hyperparameters, l: usize) -> f64 {
    let ybar = photon_total(y);
    let shape = ybar + hp.alpha_b(l);
    hp.ln_class_prior[0] + ln_gamma(shape) - shape * (hp.bins as f64 + hp.beta_b(l)).ln() - log_norm_gamma_l(y, hp, l)
}

/// Part of `ln F(ω, d)` that does not depend on `d`:
/// `(α^r - 1) ln ω - (α† + ȳ) ln(β^b + T(1 + ω(1 + β^r)))`.
#[inline]
pub(crate) fn ln_f_offset(terms: &ClassTerms, beta_b: f64, bins: f64, ybar: f64, omega: f64) -> f64 {
    (terms.alpha_r - 1.0) * omega.ln()
        - (terms.alpha_dagger + ybar) * (beta_b + bins * (1.0 + omega * (1.0 + terms.beta_r))).ln()
}

/// `Σ_t y_t ln(ω T g(t - d) + 1)` by direct summation over non-zero counts,
/// with circular shifts.
pub fn direct_score(y: &[u32], g: &[f64], omega: f64, d: usize) -> f64 {
    let t_len = y.len();
    let scale = omega * t_len as f64;
    y.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(t, &c)| c as f64 * (scale * g[(t + t_len - d) % t_len]).ln_1p())
        .sum()
}

/// One wavelength of one pixel, reduced to what every class needs.
#[derive(Debug, Clone)]
pub struct ChannelEvidence {
    pub ybar: f64,
    pub ln_gamma: f64,
    /// Matched-filter scores at every quadrature node, row-major `[j][d]`.
    pub scores: Vec<f64>,
}

impl ChannelEvidence {
    pub fn new(y: &[u32], hp: &Hyperparameters, l: usize, bank: &MatchedFilterBank) -> Self {
        ChannelEvidence {
            ybar: photon_total(y),
            ln_gamma: log_norm_gamma_l(y, hp, l),
            scores: bank.node_scores(l, y),
        }
    }

    /// `out[d] = ln p(d) + ln D_{l,k} - ln γ_l + ln ∫ F(ω, d) dω`, class
    /// prior excluded.
    pub fn depth_terms(&self, hp: &Hyperparameters, k: usize, l: usize, quad: &QuadratureSpec, out: &mut [f64]) {
        let t_len = hp.bins;
        let terms = hp.class_terms(k, l);
        let offsets: Vec<f64> = quad
            .nodes()
            .iter()
            .map(|&w| ln_f_offset(terms, hp.beta_b(l), t_len as f64, self.ybar, w))
            .collect();
        let ln_d = ln_gamma(self.ybar + terms.alpha_dagger) + terms.ln_d_const;
        let base = hp.ln_depth_prior() + ln_d - self.ln_gamma;
        let ln_a = terms.alpha_r.ln();
        for (d, o) in out.iter_mut().enumerate().take(t_len) {
            let integral = quad.integrate_ln_with(|j| self.scores[j * t_len + d] + offsets[j], ln_a);
            *o = base + integral;
        }
    }
}

/// Per-wavelength class-`k` log marginal
/// `ln Σ_d p(u=k) p(d) D γ^{-1} ∫ F(ω, d) dω`.
pub fn class_log_marginal_k_l(
    ev: &ChannelEvidence,
    k: usize,
    l: usize,
    hp: &Hyperparameters,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let mut buf = vec![0.0; hp.bins];
    ev.depth_terms(hp, k, l, quad, &mut buf);
    let v = log_sum_exp(&buf);
    if v == f64::NEG_INFINITY || v.is_nan() {
        return Err(Error::QuadratureUnderflow { class: k });
    }
    Ok(hp.ln_class_prior[k] + v)
}

/// Pixel log marginal of class `k` (`0` for no target) over all wavelengths,
/// with the class prior counted once.
///
/// `y` holds `L x T` counts.
pub fn class_log_marginal_k(y: &[u32], k: usize, hp: &Hyperparameters, irf: &Irf, quad: &QuadratureSpec) -> Result<f64> {
    let t_len = hp.bins;
    if y.len() != hp.wavelengths() * t_len || irf.bins() != t_len || irf.wavelengths() != hp.wavelengths() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for L={} T={}, IRF {}x{}",
            y.len(),
            hp.wavelengths(),
            t_len,
            irf.wavelengths(),
            irf.bins()
        )));
    }
    if k > hp.classes() {
        return Err(Error::ClassOutOfRange { class: k, classes: hp.classes() });
    }
    let prior = hp.ln_class_prior[k];
    let mut total = prior;
    if k == 0 {
        for (l, ch) in y.chunks_exact(t_len).enumerate() {
            total += class_log_marginal_empty(ch, hp, l) - prior;
        }
        return Ok(total);
    }
    let corr = Correlator::new(t_len);
    for (l, ch) in y.chunks_exact(t_len).enumerate() {
        let ys = corr.spectrum(ch.iter().map(|&c| c as f64));
        let mut scores = vec![0.0; quad.len() * t_len];
        let mut buf = Vec::with_capacity(t_len);
        for (j, &w) in quad.nodes().iter().enumerate() {
            let ks = corr.spectrum(log_kernel(irf.channel(l), w));
            corr.correlate_into(&ys, &ks, &mut buf, &mut scores[j * t_len..(j + 1) * t_len]);
        }
        let ev = ChannelEvidence { ybar: photon_total(ch), ln_gamma: log_norm_gamma_l(ch, hp, l), scores };
        total += class_log_marginal_k_l(&ev, k, l, hp, quad)? - prior;
    }
    Ok(total)
}

/// `ln F(ω, d)` for class `k` at wavelength `l` without the `d`-free
/// constants `D` and `γ`.
pub fn ln_integrand(y: &[u32], g: &[f64], k: usize, l: usize, d: usize, hp: &Hyperparameters, omega: f64) -> f64 {
    direct_score(y, g, omega, d) + ln_f_offset(hp.class_terms(k, l), hp.beta_b(l), hp.bins as f64, photon_total(y), omega)
}

/// Maximizer of `F(ω, d)` over the quadrature range: best node, then a
/// golden-section search between its neighbours.
pub fn omega_map(y: &[u32], g: &[f64], k: usize, l: usize, d: usize, hp: &Hyperparameters, quad: &QuadratureSpec) -> f64 {
    let f = |w: f64| ln_integrand(y, g, k, l, d, hp, w);
    let vals: Vec<f64> = quad.nodes().iter().map(|&w| f(w)).collect();
    omega_map_from_nodes(&vals, quad, f)
}

pub(crate) fn omega_map_from_nodes(node_vals: &[f64], quad: &QuadratureSpec, f: impl Fn(f64) -> f64) -> f64 {
    let mut best = 0;
    for (j, &v) in node_vals.iter().enumerate() {
        if v > node_vals[best] {
            best = j;
        }
    }
    let ln_nodes = quad.ln_nodes();
    let lo = ln_nodes[best.saturating_sub(1)];
    let hi = ln_nodes[(best + 1).min(ln_nodes.len() - 1)];
    let g = |x: f64| f(x.exp());
    let (mut a, mut b) = (lo, hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut e = a + inv_phi * (b - a);
    let (mut fc, mut fe) = (g(c), g(e));
    for _ in 0..40 {
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + inv_phi * (b - a);
            fe = g(e);
        }
    }
    let x = 0.5 * (a + b);
    let (omega, val) = (x.exp(), g(x));
    let node = node_vals[best];
    let out = if val >= node { omega } else { quad.nodes()[best] };
    out.clamp(quad.omega_min(), quad.omega_max())
}
