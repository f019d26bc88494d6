//! Circular cross-correlation of photon histograms with IRF-derived kernels.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::quadrature::QuadratureSpec;
use crate::scene::Irf;

/// Forward/inverse transforms of one length.
#[derive(Clone)]
pub struct Correlator {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Correlator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Correlator").field("len", &self.len).finish()
    }
}

impl Correlator {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Correlator { len, forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len) }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spectrum(&self, signal: impl IntoIterator<Item = f64>) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = signal.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        debug_assert_eq!(buf.len(), self.len);
        self.forward.process(&mut buf);
        buf
    }

    /// `out[d] = Σ_t y[t] κ[(t - d) mod T]` from the spectra of `y` and `κ`.
    pub fn correlate_into(&self, y_spec: &[Complex64], kernel_spec: &[Complex64], buf: &mut Vec<Complex64>, out: &mut [f64]) {
        buf.clear();
        buf.extend(y_spec.iter().zip(kernel_spec).map(|(a, b)| a * b.conj()));
        self.inverse.process(buf);
        let scale = 1.0 / self.len as f64;
        for (o, v) in out.iter_mut().zip(buf.iter()) {
            *o = v.re * scale;
        }
    }

    pub fn correlate(&self, y: &[f64], kernel: &[f64]) -> Vec<f64> {
        let ys = self.spectrum(y.iter().copied());
        let ks = self.spectrum(kernel.iter().copied());
        let mut out = vec![0.0; self.len];
        self.correlate_into(&ys, &ks, &mut Vec::with_capacity(self.len), &mut out);
        out
    }
}

/// `κ_ω(τ) = ln(ω T g(τ) + 1)`.
pub fn log_kernel(g: &[f64], omega: f64) -> impl Iterator<Item = f64> + '_ {
    let scale = omega * g.len() as f64;
    g.iter().map(move |&v| (scale * v).ln_1p())
}

/// Matched-filter scores `Σ_t y_t ln(ω T g(t - d) + 1)` for every depth `d`,
/// computed by FFT with circular shifts.
pub fn matched_filter_log_scores(y: &[u32], g: &[f64], omega: f64) -> Vec<f64> {
    assert_eq!(y.len(), g.len());
    let corr = Correlator::new(y.len());
    let kernel: Vec<f64> = log_kernel(g, omega).collect();
    let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    corr.correlate(&yf, &kernel)
}

/// Kernel spectra for every wavelength and quadrature node, shared by all
/// pixels.
#[derive(Debug, Clone)]
pub struct MatchedFilterBank {
    correlator: Correlator,
    /// `spectra[l][j]`.
    spectra: Vec<Vec<Vec<Complex64>>>,
}

impl MatchedFilterBank {
    pub fn new(irf: &Irf, quad: &QuadratureSpec) -> Self {
        let correlator = Correlator::new(irf.bins());
        let spectra = (0..irf.wavelengths())
            .map(|l| {
                quad.nodes()
                    .iter()
                    .map(|&w| correlator.spectrum(log_kernel(irf.channel(l), w)))
                    .collect()
            })
            .collect();
        MatchedFilterBank { correlator, spectra }
    }

    pub fn correlator(&self) -> &Correlator {
        &self.correlator
    }

    pub fn bins(&self) -> usize {
        self.correlator.len()
    }

    /// Scores of one histogram channel at every node, row-major `[j][d]`.
    pub fn node_scores(&self, l: usize, y: &[u32]) -> Vec<f64> {
        let t = self.bins();
        let nodes = self.spectra[l].len();
        let mut out = vec![0.0; nodes * t];
        if y.iter().all(|&c| c == 0) {
            return out;
        }
        let ys = self.correlator.spectrum(y.iter().map(|&c| c as f64));
        let mut buf = Vec::with_capacity(t);
        for (j, ks) in self.spectra[l].iter().enumerate() {
            self.correlator.correlate_into(&ys, ks, &mut buf, &mut out[j * t..(j + 1) * t]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(y: &[u32], g: &[f64], omega: f64) -> Vec<f64> {
        let t = y.len();
        (0..t)
            .map(|d| {
                (0..t)
                    .map(|i| y[i] as f64 * (omega * t as f64 * g[(i + t - d) % t] + 1.0).ln())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn zeros_give_zero_scores() {
        let g = vec![0.25; 4];
        assert!(matched_filter_log_scores(&[0; 4], &g, 2.0).iter().all(|&s| s.abs() < 1e-15));
    }

    #[test]
    fn delta_histogram_and_delta_irf() {
        let t = 200;
        let mut y = vec![0u32; t];
        y[100] = 1;
        let mut g = vec![0.0; t];
        g[0] = 1.0;
        let omega = 0.7;
        let s = matched_filter_log_scores(&y, &g, omega);
        let best = (0..t).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        assert_eq!(best, 100);
        assert!((s[100] - (omega * t as f64 + 1.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let t = 97;
        let irf = Irf::gaussian(t, &[(3.0, 12.0)], 1.0).unwrap();
        let y: Vec<u32> = (0..t).map(|i| ((i * 7919) % 13) as u32).collect();
        for omega in [1e-3, 0.4, 50.0] {
            let fast = matched_filter_log_scores(&y, irf.channel(0), omega);
            let slow = direct(&y, irf.channel(0), omega);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
