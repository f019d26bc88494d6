use statrs::function::gamma::ln_gamma;

use crate::scene::SpectralLibrary;

/// Per-class, per-wavelength constants of the marginal likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassTerms {
    pub alpha_r: f64,
    pub beta_r: f64,
    /// `α† = α^b + α^r`.
    pub alpha_dagger: f64,
    /// `α^r ln(T β^r) - ln Γ(α^r)`.
    pub ln_d_const: f64,
}

/// Hyperparameters for histograms collected over one particular dwell.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    pub library: SpectralLibrary,
    pub bins: usize,
    /// `ln p(u = k)` for `k = 0..=K`.
    pub ln_class_prior: Vec<f64>,
    terms: Vec<ClassTerms>,
}

impl Hyperparameters {
    /// Uniform class and depth priors; `library` must already describe the
    /// dwell of the histograms it will be applied to.
    pub fn new(library: SpectralLibrary, bins: usize) -> Self {
        let k = library.classes();
        let ln_class_prior = vec![-((k + 1) as f64).ln(); k + 1];
        Self::with_class_prior(library, bins, ln_class_prior)
    }

    /// Library rescaled to `dwell` seconds.
    pub fn for_dwell(library: &SpectralLibrary, bins: usize, dwell: f64) -> Self {
        Self::new(library.scaled_to(dwell), bins)
    }

    pub fn with_class_prior(library: SpectralLibrary, bins: usize, ln_class_prior: Vec<f64>) -> Self {
        assert_eq!(ln_class_prior.len(), library.classes() + 1);
        let t = bins as f64;
        let mut terms = Vec::with_capacity(library.classes() * library.wavelengths());
        for k in 0..library.classes() {
            for l in 0..library.wavelengths() {
                let (a, b) = (library.alpha_r[k][l], library.beta_r[k][l]);
                terms.push(ClassTerms {
                    alpha_r: a,
                    beta_r: b,
                    alpha_dagger: library.alpha_b[l] + a,
                    ln_d_const: a * (t * b).ln() - ln_gamma(a),
                });
            }
        }
        Hyperparameters { library, bins, ln_class_prior, terms }
    }

    pub fn classes(&self) -> usize {
        self.library.classes()
    }

    pub fn wavelengths(&self) -> usize {
        self.library.wavelengths()
    }

    /// Terms of class `k` (1-based) at wavelength `l`.
    #[inline]
    pub fn class_terms(&self, k: usize, l: usize) -> &ClassTerms {
        &self.terms[(k - 1) * self.wavelengths() + l]
    }

    pub fn alpha_b(&self, l: usize) -> f64 {
        self.library.alpha_b[l]
    }

    pub fn beta_b(&self, l: usize) -> f64 {
        self.library.beta_b[l]
    }

    /// `ln p(d) = -ln T`.
    pub fn ln_depth_prior(&self) -> f64 {
        -(self.bins as f64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_class_prior_sums_to_one() {
        let lib = SpectralLibrary::non_informative(3, &[10.0; 4], 100, 1.0).unwrap();
        let hp = Hyperparameters::new(lib, 100);
        let total: f64 = hp.ln_class_prior.iter().map(|p| p.exp()).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let t = hp.class_terms(2, 3);
        assert_eq!(t.alpha_dagger, hp.alpha_b(3) + t.alpha_r);
    }
}
