//! Poisson forward model.
//!
//! Counts follow `y[n,l,t] ~ Poisson((dwell / t_unit) * (r[n,l] g_l(t - d_n) + b[n,l]))`
//! with the IRF truncated at the histogram edges (no wrap-around).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::rng::{stream, StreamLabel};
use crate::sampler::ScanPlan;
use crate::scene::{GroundTruthScene, HistogramCube, Irf};

/// One acquisition at a single pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRequest {
    pub pixel: usize,
    /// Seconds.
    pub dwell: f64,
    pub seed: u64,
    /// Distinguishes repeated shots of one pixel.
    pub shot_id: u64,
}

/// Anything that can deliver photon histograms for a pixel exposure.
pub trait PhotonSource: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn wavelengths(&self) -> usize;
    fn bins(&self) -> usize;
    /// `L x T` counts for one exposure.
    fn shot(&self, req: &ShotRequest) -> Vec<u32>;
}

/// Draws a Poisson variate, treating a zero mean as a point mass.
pub(crate) fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u32
}

/// Forward model over a ground-truth scene.
#[derive(Debug, Clone, Copy)]
pub struct Simulator<'a> {
    pub scene: &'a GroundTruthScene,
    pub irf: &'a Irf,
}

impl<'a> Simulator<'a> {
    pub fn new(scene: &'a GroundTruthScene, irf: &'a Irf) -> Self {
        assert_eq!(scene.bins, irf.bins(), "scene and IRF bin counts differ");
        assert_eq!(scene.wavelengths, irf.wavelengths(), "scene and IRF wavelength counts differ");
        Simulator { scene, irf }
    }

    /// Expected count in bin `t` (0-based) of wavelength `l` at pixel `n`.
    pub fn expected_rate(&self, n: usize, l: usize, t: usize, dwell: f64) -> f64 {
        let s = self.scene;
        let offset = t as isize - s.depth[n] as isize;
        let signal = s.reflectivity_at(n, l) * self.irf.value(l, offset);
        (dwell / s.unit_dwell) * (signal + s.background_at(n, l))
    }

    pub fn simulate_shot(&self, req: &ShotRequest) -> Vec<u32> {
        let s = self.scene;
        let mut rng = stream(req.seed, StreamLabel::Shot, req.pixel as u64, req.shot_id);
        let mut out = Vec::with_capacity(s.wavelengths * s.bins);
        for l in 0..s.wavelengths {
            for t in 0..s.bins {
                out.push(poisson(&mut rng, self.expected_rate(req.pixel, l, t, req.dwell)));
            }
        }
        out
    }
}

impl PhotonSource for Simulator<'_> {
    fn rows(&self) -> usize {
        self.scene.rows
    }
    fn cols(&self) -> usize {
        self.scene.cols
    }
    fn wavelengths(&self) -> usize {
        self.scene.wavelengths
    }
    fn bins(&self) -> usize {
        self.scene.bins
    }
    fn shot(&self, req: &ShotRequest) -> Vec<u32> {
        self.simulate_shot(req)
    }
}

/// Acquires every exposure of `plan` and accumulates it into `cube`.
///
/// Shots are drawn in parallel; each is keyed by `(seed, pixel, iteration,
/// repeat)` so the result does not depend on scheduling. Returns the pixels
/// exposed, in plan order, with the photon count of each exposure.
pub fn execute_plan<S: PhotonSource + ?Sized>(
    source: &S,
    plan: &ScanPlan,
    cube: &mut HistogramCube,
    seed: u64,
) -> Vec<(usize, u64)> {
    let exposures = plan.exposures(source.rows(), source.cols());
    let mut repeats = std::collections::HashMap::new();
    let requests: Vec<ShotRequest> = exposures
        .iter()
        .map(|&(pixel, dwell)| {
            let k = repeats.entry(pixel).or_insert(0u64);
            let req = ShotRequest {
                pixel,
                dwell: dwell.as_secs_f64(),
                seed,
                shot_id: (plan.iteration << 16) | *k,
            };
            *k += 1;
            req
        })
        .collect();
    let shots: Vec<Vec<u32>> = requests.par_iter().map(|req| source.shot(req)).collect();
    requests
        .iter()
        .zip(shots)
        .map(|(req, counts)| {
            let photons = counts.iter().map(|&c| c as u64).sum();
            cube.accumulate(req.pixel, &counts, req.dwell);
            (req.pixel, photons)
        })
        .collect()
}
