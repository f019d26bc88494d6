use rustfft::num_complex::Complex64;

use crate::inference::{argmax_first, Correlator};
use crate::scene::Irf;

/// Floor applied to `ln g` where the IRF is zero.
pub const LOG_IRF_FLOOR: f64 = -23.025850929940457;

/// Log-IRF cross-correlation depth estimator (maximum likelihood without
/// background).
#[derive(Debug, Clone)]
pub struct XcorrFilter {
    correlator: Correlator,
    spectra: Vec<Vec<Complex64>>,
    wavelengths: usize,
}

impl XcorrFilter {
    pub fn new(irf: &Irf, log_floor: f64) -> Self {
        let correlator = Correlator::new(irf.bins());
        let spectra = (0..irf.wavelengths())
            .map(|l| correlator.spectrum(irf.channel(l).iter().map(|&g| if g > 0.0 { g.ln().max(log_floor) } else { log_floor })))
            .collect();
        XcorrFilter { correlator, spectra, wavelengths: irf.wavelengths() }
    }

    /// `Σ_l Σ_t y_{l,t} ln g_l(t - d)` for every `d`.
    pub fn scores(&self, y: &[u32]) -> Vec<f64> {
        let t = self.correlator.len();
        assert_eq!(y.len(), t * self.wavelengths);
        let mut total = vec![0.0; t];
        let mut out = vec![0.0; t];
        let mut buf = Vec::with_capacity(t);
        for (ch, ks) in y.chunks_exact(t).zip(&self.spectra) {
            if ch.iter().all(|&c| c == 0) {
                continue;
            }
            let ys = self.correlator.spectrum(ch.iter().map(|&c| c as f64));
            self.correlator.correlate_into(&ys, ks, &mut buf, &mut out);
            for (a, b) in total.iter_mut().zip(&out) {
                *a += b;
            }
        }
        total
    }

    /// Best depth bin, `None` for an empty histogram.
    pub fn depth(&self, y: &[u32]) -> Option<usize> {
        if y.iter().all(|&c| c == 0) {
            return None;
        }
        Some(argmax_first(&self.scores(y)))
    }
}

/// One-off [`XcorrFilter::depth`] with the default floor.
pub fn xcorr_depth(y: &[u32], irf: &Irf) -> Option<usize> {
    XcorrFilter::new(irf, LOG_IRF_FLOOR).depth(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_histogram_delta_irf() {
        let irf = Irf::delta(200, 1, 1e-12);
        let mut y = vec![0u32; 200];
        y[77] = 4;
        assert_eq!(xcorr_depth(&y, &irf), Some(77));
        assert_eq!(xcorr_depth(&[0; 200], &irf), None);
    }
}
