use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::hyper::Hyperparameters;
use super::marginal::{class_log_marginal_empty, ln_f_offset, omega_map_from_nodes, ChannelEvidence, direct_score};
use super::matched_filter::{log_kernel, MatchedFilterBank};
use super::quadrature::{log_sum_exp, QuadratureConfig, QuadratureSpec};
use crate::error::{Error, Result};
use crate::scene::{HistogramCube, Irf, SpectralLibrary};

/// Relative tolerance under which two log scores count as tied.
const TIE: f64 = 1e-12;

/// Tunables of the per-pixel engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Half-width `ε` (bins) of the NCD window.
    #[serde(default = "default_ncd_window")]
    pub ncd_window: usize,
    /// `p(u = k)` for `k = 0..=K`; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_prior: Option<Vec<f64>>,
}

fn default_ncd_window() -> usize {
    2
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig { quadrature: QuadratureConfig::default(), ncd_window: 2, class_prior: None }
    }
}

/// Everything the engine reports for one pixel. Depths are 0-based bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelEstimate {
    /// `p(u = k | Y)` for `k = 0..=K`.
    pub class_posterior: Vec<f64>,
    pub label: usize,
    pub depth_posterior: Vec<f64>,
    pub depth: usize,
    /// Per wavelength.
    pub omega_map: Vec<f64>,
    pub ncd: f64,
    pub photons: u64,
}

impl PixelEstimate {
    /// `(θ, ε)` with `θ = (depth, label)`; the label carries no separate
    /// uncertainty so both components share the NCD.
    pub fn theta(&self) -> ([f64; 2], [f64; 2]) {
        ([self.depth as f64, self.label as f64], [self.ncd, self.ncd])
    }
}

/// Index of the largest value, ties to the smallest index.
pub fn argmax_first(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] + TIE * xs[best].abs().max(1.0) {
            best = i;
        }
    }
    best
}

/// Normalizes log weights into probabilities.
pub fn softmax(ln_w: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(ln_w);
    ln_w.iter().map(|v| (v - z).exp()).collect()
}

/// `-ln Σ_{|d - d̂| ≤ ε} p(d)` over a circular window.
pub fn ncd(posterior: &[f64], d_hat: usize, eps: usize) -> f64 {
    let t = posterior.len();
    let mass: f64 = if 2 * eps + 1 >= t {
        posterior.iter().sum()
    } else {
        (0..=2 * eps).map(|i| posterior[(d_hat + t + i - eps) % t]).sum()
    };
    (-mass.min(1.0).ln()).max(0.0)
}

/// MAP label: best target class if it beats the no-target hypothesis,
/// ties resolved toward the smaller class.
pub fn decide_label(class_posterior: &[f64]) -> usize {
    let k = 1 + argmax_first(&class_posterior[1..]);
    if class_posterior[k] > class_posterior[0] * (1.0 + TIE) {
        k
    } else {
        0
    }
}

/// Per-pixel Bayesian classifier and depth estimator.
#[derive(Debug, Clone)]
pub struct Engine {
    irf: Irf,
    library: SpectralLibrary,
    quad: QuadratureSpec,
    bank: MatchedFilterBank,
    ncd_window: usize,
    ln_class_prior: Vec<f64>,
}

impl Engine {
    pub fn new(irf: Irf, library: SpectralLibrary, cfg: &InferenceConfig) -> Result<Self> {
        library.validate()?;
        if irf.wavelengths() != library.wavelengths() {
            return Err(Error::DimensionMismatch(format!(
                "IRF has {} wavelengths, library {}",
                irf.wavelengths(),
                library.wavelengths()
            )));
        }
        let k = library.classes();
        let ln_class_prior = match &cfg.class_prior {
            None => vec![-((k + 1) as f64).ln(); k + 1],
            Some(p) => {
                if p.len() != k + 1 {
                    return Err(Error::DimensionMismatch(format!("class prior has {} entries, expected {}", p.len(), k + 1)));
                }
                let total: f64 = p.iter().sum();
                if p.iter().any(|&v| !(v > 0.0)) || !total.is_finite() {
                    return Err(Error::invalid("class_prior", "entries must be positive"));
                }
                p.iter().map(|v| (v / total).ln()).collect()
            }
        };
        let quad = QuadratureSpec::from_config(&cfg.quadrature)?;
        let bank = MatchedFilterBank::new(&irf, &quad);
        Ok(Engine { irf, library, quad, bank, ncd_window: cfg.ncd_window, ln_class_prior })
    }

    pub fn irf(&self) -> &Irf {
        &self.irf
    }

    pub fn library(&self) -> &SpectralLibrary {
        &self.library
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn bins(&self) -> usize {
        self.irf.bins()
    }

    pub fn wavelengths(&self) -> usize {
        self.irf.wavelengths()
    }

    pub fn classes(&self) -> usize {
        self.library.classes()
    }

    pub fn hyperparameters(&self, dwell: f64) -> Hyperparameters {
        Hyperparameters::with_class_prior(self.library.scaled_to(dwell), self.bins(), self.ln_class_prior.clone())
    }

    fn check_len(&self, y: &[u32]) -> Result<()> {
        if y.len() != self.wavelengths() * self.bins() {
            return Err(Error::DimensionMismatch(format!(
                "histogram has {} counts, expected L*T = {}",
                y.len(),
                self.wavelengths() * self.bins()
            )));
        }
        Ok(())
    }

    /// Class posterior and label of one `L x T` histogram collected over
    /// `dwell` seconds.
    pub fn classify(&self, y: &[u32], dwell: f64) -> Result<(Vec<f64>, usize)> {
        self.check_len(y)?;
        if !(dwell > 0.0) {
            return Err(Error::invalid("dwell", "histogram was never exposed"));
        }
        let hp = self.hyperparameters(dwell);
        let evidence = self.evidence(y, &hp);
        let (ln_marg, _) = self.class_marginals(y, &hp, &evidence)?;
        let post = softmax(&ln_marg);
        let label = decide_label(&post);
        Ok((post, label))
    }

    fn evidence(&self, y: &[u32], hp: &Hyperparameters) -> Vec<ChannelEvidence> {
        y.chunks_exact(self.bins())
            .enumerate()
            .map(|(l, ch)| ChannelEvidence::new(ch, hp, l, &self.bank))
            .collect()
    }

    /// Log class marginals and per-class, per-wavelength depth terms.
    fn class_marginals(
        &self,
        y: &[u32],
        hp: &Hyperparameters,
        evidence: &[ChannelEvidence],
    ) -> Result<(Vec<f64>, Vec<Vec<Vec<f64>>>)> {
        let t = self.bins();
        let p0 = hp.ln_class_prior[0];
        let mut ln_marg = Vec::with_capacity(self.classes() + 1);
        ln_marg.push(p0 + y.chunks_exact(t).enumerate().map(|(l, ch)| class_log_marginal_empty(ch, hp, l) - p0).sum::<f64>());
        let mut terms = Vec::with_capacity(self.classes());
        for k in 1..=self.classes() {
            let mut total = hp.ln_class_prior[k];
            let mut per_l = Vec::with_capacity(self.wavelengths());
            for (l, ev) in evidence.iter().enumerate() {
                let mut buf = vec![0.0; t];
                ev.depth_terms(hp, k, l, &self.quad, &mut buf);
                let v = log_sum_exp(&buf);
                if !v.is_finite() {
                    return Err(Error::QuadratureUnderflow { class: k });
                }
                total += v;
                per_l.push(buf);
            }
            ln_marg.push(total);
            terms.push(per_l);
        }
        Ok((ln_marg, terms))
    }

    /// Full estimate of one `L x T` histogram collected over `dwell` seconds.
    pub fn estimate(&self, y: &[u32], dwell: f64) -> Result<PixelEstimate> {
        self.check_len(y)?;
        if !(dwell > 0.0) {
            return Err(Error::invalid("dwell", "histogram was never exposed"));
        }
        let t = self.bins();
        let hp = self.hyperparameters(dwell);
        let evidence = self.evidence(y, &hp);
        let (ln_marg, terms) = self.class_marginals(y, &hp, &evidence)?;
        let class_posterior = softmax(&ln_marg);
        let label = decide_label(&class_posterior);
        let k_star = if label > 0 { label } else { 1 + argmax_first(&ln_marg[1..]) };

        let mut omega_map = Vec::with_capacity(self.wavelengths());
        for (l, (ch, ev)) in y.chunks_exact(t).zip(&evidence).enumerate() {
            let d_star = argmax_first(&terms[k_star - 1][l]);
            let ct = hp.class_terms(k_star, l);
            let g = self.irf.channel(l);
            let node_vals: Vec<f64> = self
                .quad
                .nodes()
                .iter()
                .enumerate()
                .map(|(j, &w)| ev.scores[j * t + d_star] + ln_f_offset(ct, hp.beta_b(l), t as f64, ev.ybar, w))
                .collect();
            let w = omega_map_from_nodes(&node_vals, &self.quad, |w| {
                direct_score(ch, g, w, d_star) + ln_f_offset(ct, hp.beta_b(l), t as f64, ev.ybar, w)
            });
            omega_map.push(w);
        }

        let depth_posterior = self.depth_posterior(y, &omega_map, &hp, &evidence);
        let depth = argmax_first(&depth_posterior);
        let ncd = ncd(&depth_posterior, depth, self.ncd_window);
        Ok(PixelEstimate {
            class_posterior,
            label,
            depth_posterior,
            depth,
            omega_map,
            ncd,
            photons: y.iter().map(|&c| c as u64).sum(),
        })
    }

    /// `p(d | Y, ω_map) ∝ Σ_k p(u=k) Π_l D γ^{-1} F(ω_map_l, d)`.
    fn depth_posterior(&self, y: &[u32], omega_map: &[f64], hp: &Hyperparameters, evidence: &[ChannelEvidence]) -> Vec<f64> {
        let t = self.bins();
        let corr = self.bank.correlator();
        let scores: Vec<Vec<f64>> = y
            .chunks_exact(t)
            .zip(omega_map)
            .enumerate()
            .map(|(l, (ch, &w))| {
                let mut out = vec![0.0; t];
                if ch.iter().any(|&c| c > 0) {
                    let ys = corr.spectrum(ch.iter().map(|&c| c as f64));
                    let ks = corr.spectrum(log_kernel(self.irf.channel(l), w));
                    corr.correlate_into(&ys, &ks, &mut Vec::with_capacity(t), &mut out);
                }
                out
            })
            .collect();
        let mut ln_post = vec![0.0; t];
        let mut per_class = vec![0.0; self.classes()];
        let consts: Vec<f64> = (1..=self.classes())
            .map(|k| {
                hp.ln_class_prior[k]
                    + evidence
                        .iter()
                        .enumerate()
                        .map(|(l, ev)| {
                            let ct = hp.class_terms(k, l);
                            ln_gamma(ev.ybar + ct.alpha_dagger) + ct.ln_d_const - ev.ln_gamma
                                + ln_f_offset(ct, hp.beta_b(l), t as f64, ev.ybar, omega_map[l])
                        })
                        .sum::<f64>()
            })
            .collect();
        for (d, lp) in ln_post.iter_mut().enumerate() {
            let s: f64 = scores.iter().map(|row| row[d]).sum();
            for (pc, c) in per_class.iter_mut().zip(&consts) {
                *pc = c + s;
            }
            *lp = log_sum_exp(&per_class);
        }
        softmax(&ln_post)
    }

    /// Estimate for pixel `n` of a cube; unexposed pixels report no data.
    pub fn estimate_pixel(&self, cube: &HistogramCube, n: usize) -> Result<PixelEstimate> {
        if !cube.is_scanned(n) {
            return Err(Error::NoData(n));
        }
        self.estimate(cube.pixel(n), cube.dwell(n))
    }

    /// Estimates for many pixels in parallel, in input order.
    pub fn estimate_pixels(&self, cube: &HistogramCube, pixels: &[usize]) -> Vec<Result<PixelEstimate>> {
        pixels.par_iter().map(|&n| self.estimate_pixel(cube, n)).collect()
    }
}
