use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gamma hyperparameters of the class reflectivity signatures and of the
/// per-wavelength background.
///
/// Shapes (`alpha`) and rates (`beta`) describe photon counts collected over
/// `reference_dwell` seconds. A gamma rate scales inversely with dwell, so
/// [`SpectralLibrary::scaled_to`] rescales them for any other dwell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralLibrary {
    /// `alpha_r[k][l]` for classes `k = 1..=K` stored at index `k - 1`.
    pub alpha_r: Vec<Vec<f64>>,
    pub beta_r: Vec<Vec<f64>>,
    pub alpha_b: Vec<f64>,
    pub beta_b: Vec<f64>,
    /// Seconds of acquisition the hyperparameters refer to.
    pub reference_dwell: f64,
}

impl SpectralLibrary {
    pub fn new(
        alpha_r: Vec<Vec<f64>>,
        beta_r: Vec<Vec<f64>>,
        alpha_b: Vec<f64>,
        beta_b: Vec<f64>,
        reference_dwell: f64,
    ) -> Result<Self> {
        let lib = SpectralLibrary { alpha_r, beta_r, alpha_b, beta_b, reference_dwell };
        lib.validate()?;
        Ok(lib)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.alpha_r.len();
        let l = self.alpha_b.len();
        if k == 0 || l == 0 {
            return Err(Error::DimensionMismatch("library needs K >= 1 and L >= 1".into()));
        }
        if self.beta_r.len() != k || self.beta_b.len() != l {
            return Err(Error::DimensionMismatch(format!(
                "library: alpha_r has {k} classes, beta_r {}; alpha_b has {l} wavelengths, beta_b {}",
                self.beta_r.len(),
                self.beta_b.len()
            )));
        }
        for (name, rows) in [("alpha_r", &self.alpha_r), ("beta_r", &self.beta_r)] {
            for (class, row) in rows.iter().enumerate() {
                if row.len() != l {
                    return Err(Error::DimensionMismatch(format!(
                        "library {name} class {} has {} wavelengths, expected {l}",
                        class + 1,
                        row.len()
                    )));
                }
                if let Some(v) = row.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::invalid("library", format!("{name} entry {v} must be positive")));
                }
            }
        }
        for (name, row) in [("alpha_b", &self.alpha_b), ("beta_b", &self.beta_b)] {
            if let Some(v) = row.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::invalid("library", format!("{name} entry {v} must be positive")));
            }
        }
        if !(self.reference_dwell > 0.0) {
            return Err(Error::invalid("library", "reference_dwell must be positive"));
        }
        Ok(())
    }

    /// Library from mean signal photons per class and wavelength.
    ///
    /// Each class gets shape `shape` and rate `shape / mean`. The background
    /// uses `(1, T / bg_mean_total)` where `bg_mean_total` is the expected
    /// number of background photons over the whole histogram.
    pub fn from_signatures(
        class_means: &[Vec<f64>],
        shape: f64,
        bg_mean_total: &[f64],
        bins: usize,
        reference_dwell: f64,
    ) -> Result<Self> {
        let alpha_r = class_means.iter().map(|row| vec![shape; row.len()]).collect();
        let beta_r = class_means
            .iter()
            .map(|row| row.iter().map(|&m| shape / m).collect())
            .collect();
        let alpha_b = vec![1.0; bg_mean_total.len()];
        let beta_b = bg_mean_total.iter().map(|&m| bins as f64 / m).collect();
        SpectralLibrary::new(alpha_r, beta_r, alpha_b, beta_b, reference_dwell)
    }

    /// Relatively non-informative hyperparameters
    /// `(alpha_r, beta_r, alpha_b, beta_b) = (2, 2 / r_M, 1, T / r_M)` where
    /// `r_M[l]` is the average number of signal photons per pixel.
    pub fn non_informative(classes: usize, mean_signal: &[f64], bins: usize, reference_dwell: f64) -> Result<Self> {
        let alpha_r = vec![vec![2.0; mean_signal.len()]; classes];
        let beta_r = vec![mean_signal.iter().map(|&r| 2.0 / r).collect(); classes];
        let alpha_b = vec![1.0; mean_signal.len()];
        let beta_b = mean_signal.iter().map(|&r| bins as f64 / r).collect();
        SpectralLibrary::new(alpha_r, beta_r, alpha_b, beta_b, reference_dwell)
    }

    pub fn classes(&self) -> usize {
        self.alpha_r.len()
    }

    pub fn wavelengths(&self) -> usize {
        self.alpha_b.len()
    }

    /// Mean signal photons of class `k` (1-based) at wavelength `l` over the
    /// reference dwell.
    pub fn class_mean(&self, k: usize, l: usize) -> f64 {
        self.alpha_r[k - 1][l] / self.beta_r[k - 1][l]
    }

    /// Same library expressed for photon counts collected over `dwell` seconds.
    pub fn scaled_to(&self, dwell: f64) -> SpectralLibrary {
        let s = self.reference_dwell / dwell;
        SpectralLibrary {
            alpha_r: self.alpha_r.clone(),
            beta_r: self.beta_r.iter().map(|row| row.iter().map(|b| b * s).collect()).collect(),
            alpha_b: self.alpha_b.clone(),
            beta_b: self.beta_b.iter().map(|b| b * s).collect(),
            reference_dwell: dwell,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_and_ragged() {
        assert!(SpectralLibrary::new(vec![vec![1.0]], vec![vec![0.0]], vec![1.0], vec![1.0], 1.0).is_err());
        assert!(SpectralLibrary::new(vec![vec![1.0, 1.0]], vec![vec![1.0]], vec![1.0], vec![1.0], 1.0).is_err());
        assert!(SpectralLibrary::new(vec![vec![1.0]], vec![vec![1.0]], vec![1.0, 2.0], vec![1.0], 1.0).is_err());
        assert!(SpectralLibrary::new(vec![vec![1.0]], vec![vec![1.0]], vec![1.0], vec![1.0], 1.0).is_ok());
    }

    #[test]
    fn scaling_preserves_shape_and_scales_means() {
        let lib = SpectralLibrary::from_signatures(&[vec![10.0, 4.0]], 5.0, &[20.0, 20.0], 100, 1e-3).unwrap();
        let doubled = lib.scaled_to(2e-3);
        assert!((doubled.class_mean(1, 0) - 20.0).abs() < 1e-12);
        assert!((doubled.class_mean(1, 1) - 8.0).abs() < 1e-12);
        assert_eq!(doubled.alpha_r, lib.alpha_r);
        // background mean alpha/beta = bg_mean / T
        assert!((doubled.alpha_b[0] / doubled.beta_b[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn non_informative_defaults() {
        let lib = SpectralLibrary::non_informative(1, &[40.0], 191, 30e-3).unwrap();
        assert_eq!(lib.alpha_r[0][0], 2.0);
        assert_eq!(lib.beta_r[0][0], 0.05);
        assert_eq!(lib.alpha_b[0], 1.0);
        assert!((lib.beta_b[0] - 191.0 / 40.0).abs() < 1e-12);
    }
}
