use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, ReferenceMaps};
use super::trace::{ExperimentTrace, Snapshot, TraceRow};
use super::xcorr::{XcorrFilter, LOG_IRF_FLOOR};
use crate::config::secs;
use crate::error::{Error, Result};
use crate::inference::{Engine, InferenceConfig};
use crate::reconstruct::{build_roi, inpaint, inpaint_labels, DenseField, RoiConfig, RoiMap, SparseField};
use crate::rng::{stream, StreamLabel};
use crate::sampler::{
    acquisition_time, check_stop, move_time, LoopState, Placement, Sampler, ScanMode, ScanPlan, ScanScenario, StopCriteria,
    StopReason,
};
use crate::scene::HistogramCube;
use crate::simulate::{execute_plan, PhotonSource};

/// Inpainting and sampling-map settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    #[serde(default = "default_max_wind")]
    pub max_wind: u32,
    /// Target classes; all classes when empty.
    #[serde(default)]
    pub targets: Vec<usize>,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_max_wind() -> u32 {
    3
}

fn default_floor() -> f64 {
    0.05
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig { max_wind: default_max_wind(), targets: Vec::new(), floor: default_floor() }
    }
}

impl ReconstructionConfig {
    pub fn roi(&self, classes: usize) -> RoiConfig {
        let targets = if self.targets.is_empty() { (1..=classes).collect() } else { self.targets.clone() };
        RoiConfig { targets, floor: self.floor }
    }
}

/// How processing time is charged to the total-time column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessingModel {
    /// Fixed cost per estimated pixel.
    #[serde(with = "secs", default = "default_per_pixel")]
    pub per_pixel: Duration,
    /// Fixed cost per iteration for inpainting and the sampling map.
    #[serde(with = "secs", default)]
    pub per_iteration: Duration,
    /// Charge measured wall time instead of the fixed costs. Makes total
    /// times machine dependent.
    #[serde(default)]
    pub measured: bool,
    /// Pixels processed concurrently.
    #[serde(default = "default_parallelism")]
    pub parallelism: f64,
}

fn default_per_pixel() -> Duration {
    Duration::from_micros(500)
}

fn default_parallelism() -> f64 {
    1.0
}

impl Default for ProcessingModel {
    fn default() -> Self {
        ProcessingModel {
            per_pixel: default_per_pixel(),
            per_iteration: Duration::ZERO,
            measured: false,
            parallelism: default_parallelism(),
        }
    }
}

impl ProcessingModel {
    fn charge(&self, pixels: usize, measured: Duration) -> Duration {
        let raw = if self.measured { measured } else { self.per_pixel * pixels as u32 + self.per_iteration };
        raw.div_f64(self.parallelism.max(1.0))
    }
}

/// Everything an experiment needs besides the scene and the models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub scenario: ScanScenario,
    pub stop: StopCriteria,
    #[serde(default)]
    pub inference: InferenceConfig,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
    #[serde(default)]
    pub processing: ProcessingModel,
    /// Keep the maps of every iteration.
    #[serde(default)]
    pub snapshots: bool,
}

/// Static baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StaticStrategy {
    /// Every `stride`-th pixel along both axes.
    Uniform { stride: usize },
    /// A fixed random fraction of the pixels.
    Random { ratio: f64 },
}

impl StaticStrategy {
    /// Pixels the strategy visits, in raster order.
    pub fn pixels(&self, rows: usize, cols: usize, seed: u64) -> Result<Vec<usize>> {
        match *self {
            StaticStrategy::Uniform { stride } => {
                if stride == 0 {
                    return Err(Error::invalid("strategy.stride", "must be positive"));
                }
                Ok((0..rows * cols).filter(|n| (n / cols) % stride == 0 && (n % cols) % stride == 0).collect())
            }
            StaticStrategy::Random { ratio } => {
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return Err(Error::invalid("strategy.ratio", format!("{ratio} outside (0, 1]")));
                }
                let n = rows * cols;
                let count = ((ratio * n as f64).round() as usize).clamp(1, n);
                let mut rng = stream(seed, StreamLabel::Static, 0, 0);
                let mut picks = sample(&mut rng, n, count).into_vec();
                picks.sort_unstable();
                Ok(picks)
            }
        }
    }
}

/// Per-pixel result kept between iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Summary {
    label: usize,
    depth: usize,
    ncd: f64,
    photons: u64,
}

/// Dense maps from the current per-pixel summaries.
struct Maps {
    depth: DenseField,
    labels: DenseField,
    ncd: DenseField,
}

fn dense_or_unfilled(field: &SparseField, max_wind: u32, labels: bool) -> Result<DenseField> {
    let r = if labels { inpaint_labels(field, max_wind) } else { inpaint(field, max_wind) };
    match r {
        Ok(d) => Ok(d),
        Err(Error::EmptyField) => Ok(DenseField {
            rows: field.rows,
            cols: field.cols,
            values: vec![f64::NAN; field.values.len()],
            filled: vec![false; field.values.len()],
        }),
        Err(e) => Err(e),
    }
}

fn build_maps(rows: usize, cols: usize, summaries: &[Option<Summary>], max_wind: u32) -> Result<Maps> {
    let mut depth = SparseField::empty(rows, cols);
    let mut labels = SparseField::empty(rows, cols);
    let mut ncd = SparseField::empty(rows, cols);
    for (n, s) in summaries.iter().enumerate() {
        if let Some(s) = s {
            labels.set(n, s.label as f64);
            ncd.set(n, s.ncd);
            if s.photons > 0 && s.label != 0 {
                depth.set(n, s.depth as f64);
            }
        }
    }
    Ok(Maps {
        depth: dense_or_unfilled(&depth, max_wind, false)?,
        labels: dense_or_unfilled(&labels, max_wind, true)?,
        ncd: dense_or_unfilled(&ncd, max_wind, false)?,
    })
}

/// Depth map with placeholders replaced by the median of filled values (or
/// bin 0 when nothing is filled).
fn finished_depth(field: &DenseField) -> Vec<f64> {
    let mut out = field.clone();
    let mut vals: Vec<f64> = field.values.iter().zip(&field.filled).filter(|(_, &f)| f).map(|(&v, _)| v).collect();
    let fallback = if vals.is_empty() { 0.0 } else { crate::reconstruct::median(&mut vals) };
    out.fill_remaining(fallback);
    out.values
}

fn finished_labels(field: &DenseField) -> Vec<usize> {
    field.values.iter().zip(&field.filled).map(|(&v, &f)| if f { v.round() as usize } else { 0 }).collect()
}

fn finished_ncd(field: &DenseField) -> Vec<f64> {
    let max = field.values.iter().zip(&field.filled).filter(|(_, &f)| f).map(|(&v, _)| v).fold(0.0, f64::max);
    let mut out = field.clone();
    out.fill_remaining(max);
    out.values
}

fn check_grid(source: &dyn PhotonSource, engine: &Engine, reference: &ReferenceMaps) -> Result<()> {
    if source.bins() != engine.bins() || source.wavelengths() != engine.wavelengths() {
        return Err(Error::DimensionMismatch(format!(
            "source is {}x{} (L x T), models are {}x{}",
            source.wavelengths(),
            source.bins(),
            engine.wavelengths(),
            engine.bins()
        )));
    }
    if reference.rows != source.rows() || reference.cols != source.cols() {
        return Err(Error::DimensionMismatch("reference grid differs from the source grid".into()));
    }
    Ok(())
}

/// Task-driven adaptive sampling: plan, acquire, infer, inpaint, build the
/// sampling map, repeat until a stopping rule fires.
pub fn run_adaptive(source: &dyn PhotonSource, engine: &Engine, reference: &ReferenceMaps, cfg: &ExperimentConfig) -> Result<ExperimentTrace> {
    check_grid(source, engine, reference)?;
    let (rows, cols) = (source.rows(), source.cols());
    let n_pix = rows * cols;
    cfg.scenario.validate(rows, cols)?;
    let roi_cfg = cfg.reconstruction.roi(engine.classes());
    let max_dwell = cfg.stop.max_dwell.as_secs_f64();
    let bin_width = engine.irf().bin_width();

    let mut sampler = Sampler::new(cfg.scenario.clone(), cfg.seed);
    let mut cube = HistogramCube::new(rows, cols, source.wavelengths(), source.bins());
    let mut summaries: Vec<Option<Summary>> = vec![None; n_pix];
    let mut roi = RoiMap::uniform(rows, cols);
    let mut prev_depth: Option<Vec<f64>> = None;
    let (mut dwell_total, mut total) = (Duration::ZERO, Duration::ZERO);
    let mut points = 0usize;
    let mut trace = ExperimentTrace {
        rows: Vec::new(),
        confusion: Vec::new(),
        plans: Vec::new(),
        stop: StopReason::MaxIterations,
        last: empty_snapshot(n_pix),
        snapshots: Vec::new(),
    };

    for iteration in 0.. {
        let plan = sampler.next_plan(&roi, iteration)?;
        let exposures = execute_plan(source, &plan, &mut cube, cfg.seed);
        let detected = exposures.iter().filter(|(_, p)| *p > 0).count();
        if !exposures.is_empty() {
            sampler.observe(detected as f64 / exposures.len() as f64);
        }
        points += exposures.len();
        dwell_total += acquisition_time(&plan, cfg.scenario.mode);
        total += acquisition_time(&plan, cfg.scenario.mode) + move_time(&plan, cfg.scenario.mode, cfg.scenario.mirror_move);

        let started = Instant::now();
        let touched: Vec<usize> = exposures.iter().map(|(n, _)| *n).collect::<BTreeSet<_>>().into_iter().collect();
        for (&n, est) in touched.iter().zip(engine.estimate_pixels(&cube, &touched)) {
            let e = est?;
            summaries[n] = Some(Summary { label: e.label, depth: e.depth, ncd: e.ncd, photons: e.photons });
        }
        let maps = build_maps(rows, cols, &summaries, cfg.reconstruction.max_wind)?;
        let depth = finished_depth(&maps.depth);
        let labels = finished_labels(&maps.labels);
        let next_roi = build_roi(&maps.labels, &maps.ncd, &roi_cfg, cube.dwells(), max_dwell);
        total += cfg.processing.charge(touched.len(), started.elapsed());

        let m = metrics(&depth, &labels, reference, engine.classes(), bin_width);
        let scanned = (0..n_pix).filter(|&n| cube.is_scanned(n)).count();
        trace.rows.push(TraceRow {
            iteration,
            dwell_s: dwell_total.as_secs_f64(),
            total_s: total.as_secs_f64(),
            rmse_bins: m.rmse_bins,
            rmse_m: m.rmse_m,
            acc: m.accuracy,
            scanned,
        });
        trace.confusion.push(m.confusion);
        trace.plans.push(plan);
        let snap = Snapshot {
            iteration,
            samples: cube.dwells().to_vec(),
            depth: depth.clone(),
            labels,
            ncd: finished_ncd(&maps.ncd),
            roi: next_roi.as_ref().ok().cloned(),
        };
        if cfg.snapshots {
            trace.snapshots.push(snap.clone());
        }
        trace.last = snap;

        let state = LoopState {
            iteration: iteration + 1,
            scanned_points: points,
            exhausted_pixels: cube.dwells().iter().filter(|&&d| d >= max_dwell).count(),
            pixels: n_pix,
        };
        let reached = cfg.stop.reference_rmse.is_some_and(|target| m.rmse_bins <= target);
        let stop = if reached {
            Some(StopReason::ReferenceReached)
        } else {
            check_stop(prev_depth.as_deref(), &depth, &state, &cfg.stop)
        };
        if let Some(reason) = stop {
            trace.stop = reason;
            break;
        }
        match next_roi {
            Ok(r) => roi = r,
            Err(Error::ScanComplete) => {
                trace.stop = StopReason::ScanComplete;
                break;
            }
            Err(e) => return Err(e),
        }
        prev_depth = Some(depth);
    }
    Ok(trace)
}

fn empty_snapshot(n: usize) -> Snapshot {
    Snapshot { iteration: 0, samples: vec![0.0; n], depth: vec![0.0; n], labels: vec![0; n], ncd: vec![0.0; n], roi: None }
}

/// Static baseline: the strategy's pixel set is scanned in repeated passes
/// of dwell `t_0`. Depth comes from log-IRF cross-correlation plus median
/// fill; labels from the Bayesian classifier plus mode fill.
pub fn run_static(
    source: &dyn PhotonSource,
    engine: &Engine,
    reference: &ReferenceMaps,
    strategy: StaticStrategy,
    cfg: &ExperimentConfig,
) -> Result<ExperimentTrace> {
    check_grid(source, engine, reference)?;
    let (rows, cols) = (source.rows(), source.cols());
    let n_pix = rows * cols;
    let pixels = strategy.pixels(rows, cols, cfg.seed)?;
    let xcorr = XcorrFilter::new(engine.irf(), LOG_IRF_FLOOR);
    let t0 = cfg.scenario.t0;
    let max_dwell = cfg.stop.max_dwell.as_secs_f64();
    let bin_width = engine.irf().bin_width();
    let mut cube = HistogramCube::new(rows, cols, source.wavelengths(), source.bins());
    let (mut dwell_total, mut total) = (Duration::ZERO, Duration::ZERO);
    let mut trace = ExperimentTrace {
        rows: Vec::new(),
        confusion: Vec::new(),
        plans: Vec::new(),
        stop: StopReason::MaxIterations,
        last: empty_snapshot(n_pix),
        snapshots: Vec::new(),
    };

    for pass in 0..cfg.stop.max_iterations {
        let plan = ScanPlan {
            iteration: pass,
            array: 1,
            placements: pixels.iter().map(|&anchor| Placement { anchor, side: 1, dwell: t0 }).collect(),
        };
        execute_plan(source, &plan, &mut cube, cfg.seed);
        dwell_total += acquisition_time(&plan, ScanMode::Sequential);
        total += acquisition_time(&plan, ScanMode::Sequential) + move_time(&plan, ScanMode::Sequential, cfg.scenario.mirror_move);

        let started = Instant::now();
        let mut depth = SparseField::empty(rows, cols);
        let mut labels = SparseField::empty(rows, cols);
        for (&n, est) in pixels.iter().zip(engine.estimate_pixels(&cube, &pixels)) {
            labels.set(n, est?.label as f64);
            if let Some(d) = xcorr.depth(cube.pixel(n)) {
                depth.set(n, d as f64);
            }
        }
        let depth = finished_depth(&dense_or_unfilled(&depth, cfg.reconstruction.max_wind, false)?);
        let labels = finished_labels(&dense_or_unfilled(&labels, cfg.reconstruction.max_wind, true)?);
        total += cfg.processing.charge(pixels.len(), started.elapsed());

        let m = metrics(&depth, &labels, reference, engine.classes(), bin_width);
        trace.rows.push(TraceRow {
            iteration: pass,
            dwell_s: dwell_total.as_secs_f64(),
            total_s: total.as_secs_f64(),
            rmse_bins: m.rmse_bins,
            rmse_m: m.rmse_m,
            acc: m.accuracy,
            scanned: pixels.len(),
        });
        trace.confusion.push(m.confusion);
        let snap = Snapshot {
            iteration: pass,
            samples: cube.dwells().to_vec(),
            depth,
            labels,
            ncd: vec![0.0; n_pix],
            roi: None,
        };
        if cfg.snapshots {
            trace.snapshots.push(snap.clone());
        }
        trace.last = snap;
        trace.plans.push(plan);

        if cfg.stop.reference_rmse.is_some_and(|target| m.rmse_bins <= target) {
            trace.stop = StopReason::ReferenceReached;
            break;
        }
        if cube.dwell(pixels[0]) + t0.as_secs_f64() > max_dwell * (1.0 + 1e-9) {
            trace.stop = StopReason::MaxDwell;
            break;
        }
    }
    Ok(trace)
}
