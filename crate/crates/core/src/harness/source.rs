use rand_distr::{Binomial, Distribution};

use crate::rng::{stream, StreamLabel};
use crate::scene::HistogramCube;
use crate::simulate::{PhotonSource, ShotRequest};

/// Replays a recorded cube: a shot of dwell `t` at a pixel recorded over
/// `T_n` keeps each photon independently with probability `min(t / T_n, 1)`.
#[derive(Debug, Clone)]
pub struct RecordedSource {
    pub cube: HistogramCube,
}

impl RecordedSource {
    pub fn new(cube: HistogramCube) -> Self {
        RecordedSource { cube }
    }
}

impl PhotonSource for RecordedSource {
    fn rows(&self) -> usize {
        self.cube.rows()
    }
    fn cols(&self) -> usize {
        self.cube.cols()
    }
    fn wavelengths(&self) -> usize {
        self.cube.wavelengths()
    }
    fn bins(&self) -> usize {
        self.cube.bins()
    }
    fn shot(&self, req: &ShotRequest) -> Vec<u32> {
        let recorded = self.cube.dwell(req.pixel);
        let counts = self.cube.pixel(req.pixel);
        if recorded <= 0.0 {
            return vec![0; counts.len()];
        }
        let p = (req.dwell / recorded).clamp(0.0, 1.0);
        if p >= 1.0 {
            return counts.to_vec();
        }
        let mut rng = stream(req.seed, StreamLabel::Shot, req.pixel as u64, req.shot_id);
        counts
            .iter()
            .map(|&c| if c == 0 { 0 } else { Binomial::new(c as u64, p).expect("valid binomial").sample(&mut rng) as u32 })
            .collect()
    }
}
