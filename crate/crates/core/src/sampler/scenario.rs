use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::arrays::place_arrays;
use super::dwell::assign_dwell;
use super::mh::{mh_sample_locations, MhConfig};
use super::plan::{Placement, ScanPlan};
use super::timestep::TimeStepController;
use super::timing::ScanMode;
use crate::config::secs;
use crate::error::{Error, Result};
use crate::reconstruct::RoiMap;
use crate::rng::{stream, StreamLabel};

/// Acquisition hardware and per-iteration budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanScenario {
    /// Detector array side `r`; 1 scans single pixels.
    #[serde(default = "one")]
    pub array: usize,
    pub mode: ScanMode,
    /// Base dwell `t_0` of the first iteration.
    #[serde(with = "secs")]
    pub t0: Duration,
    /// Importance level `c`: dwell ranges over `[t_0, c t_0]`.
    #[serde(default = "unit")]
    pub importance: f64,
    #[serde(with = "secs")]
    pub mirror_move: Duration,
    /// Scanned positions `N_s` per iteration.
    pub points: usize,
    #[serde(default = "yes")]
    pub adapt_t0: bool,
    #[serde(with = "secs", default = "min_t0")]
    pub min_t0: Duration,
    #[serde(with = "secs", default = "max_t0")]
    pub max_t0: Duration,
    /// Block-mean ratio above which an array zooms out to `2r`.
    #[serde(default = "zoom_tie")]
    pub zoom_tie: f64,
    #[serde(default)]
    pub mh: MhConfig,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn min_t0() -> Duration {
    Duration::from_micros(1)
}

fn max_t0() -> Duration {
    Duration::from_secs(1)
}

fn zoom_tie() -> f64 {
    0.9
}

impl ScanScenario {
    pub fn pixelwise(points: usize, t0: Duration) -> Self {
        ScanScenario {
            array: 1,
            mode: ScanMode::Sequential,
            t0,
            importance: 1.0,
            mirror_move: Duration::from_micros(150),
            points,
            adapt_t0: true,
            min_t0: min_t0(),
            max_t0: max_t0(),
            zoom_tie: zoom_tie(),
            mh: MhConfig::default(),
        }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let r = self.array;
        if r == 0 || r > rows.max(cols) {
            return Err(Error::invalid("scenario.array", format!("side {r} does not fit a {rows}x{cols} grid")));
        }
        if self.points == 0 || self.points % (r * r) != 0 {
            return Err(Error::invalid("scenario.points", format!("{} is not a positive multiple of r^2 = {}", self.points, r * r)));
        }
        if !(self.importance >= 1.0) {
            return Err(Error::invalid("scenario.importance", "must be at least 1"));
        }
        if self.t0.is_zero() || self.min_t0 > self.max_t0 {
            return Err(Error::invalid("scenario.t0", "t0 must be positive and min_t0 <= max_t0"));
        }
        Ok(())
    }

    /// Placements per iteration, `N_s / r^2`.
    pub fn placements(&self) -> usize {
        self.points / (self.array * self.array)
    }
}

/// Turns sampling maps into scan plans and tracks the time step.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub scenario: ScanScenario,
    pub time_step: TimeStepController,
    seed: u64,
}

impl Sampler {
    pub fn new(scenario: ScanScenario, seed: u64) -> Self {
        let time_step = TimeStepController::new(scenario.t0, scenario.min_t0, scenario.max_t0);
        Sampler { scenario, time_step, seed }
    }

    pub fn t0(&self) -> Duration {
        self.time_step.t0
    }

    /// Plan for `iteration` drawn from `roi`. Asks for fewer placements when
    /// the map supports fewer.
    pub fn next_plan(&self, roi: &RoiMap, iteration: u64) -> Result<ScanPlan> {
        let sc = &self.scenario;
        let t0 = self.t0();
        let mut plan = ScanPlan::new(iteration, sc.array);
        if sc.array == 1 {
            let count = sc.placements().min(roi.support());
            let rng = stream(self.seed, StreamLabel::Locations, 0, iteration);
            let picks = mh_sample_locations(&roi.m, count, rng, &sc.mh)?;
            let mass: Vec<f64> = picks.iter().map(|&n| roi.m[n]).collect();
            let dwell = assign_dwell(&mass, t0, sc.importance);
            plan.placements = picks.into_iter().zip(dwell).map(|(anchor, dwell)| Placement { anchor, side: 1, dwell }).collect();
        } else {
            let r = sc.array;
            let (tr, tc) = (roi.rows.div_ceil(r), roi.cols.div_ceil(r));
            let support = (0..tr * tc)
                .filter(|t| {
                    let (r0, c0) = ((t / tc) * r, (t % tc) * r);
                    (r0..(r0 + r).min(roi.rows)).any(|i| (c0..(c0 + r).min(roi.cols)).any(|j| roi.m[i * roi.cols + j] > 0.0))
                })
                .count();
            let count = sc.placements().min(support);
            let rng = stream(self.seed, StreamLabel::Arrays, 0, iteration);
            let picks = place_arrays(roi, r, count, sc.zoom_tie, rng, &sc.mh)?;
            let mass: Vec<f64> = picks.iter().map(|p| p.mass).collect();
            let dwell = assign_dwell(&mass, t0, sc.importance);
            plan.placements = picks
                .into_iter()
                .zip(dwell)
                .map(|(p, dwell)| Placement { anchor: p.anchor, side: p.side, dwell })
                .collect();
        }
        Ok(plan)
    }

    /// Feeds back the fraction of scanned positions that saw photons.
    pub fn observe(&mut self, detect_fraction: f64) -> Duration {
        if self.scenario.adapt_t0 {
            self.time_step.update(detect_fraction)
        } else {
            self.t0()
        }
    }
}
