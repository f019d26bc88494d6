use serde::{Deserialize, Serialize};

use super::field::DenseField;
use crate::error::{Error, Result};

/// Score shaping of the sampling map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiConfig {
    /// Classes whose pixels attract samples in proportion to their NCD.
    pub targets: Vec<usize>,
    /// Exploration mass on every eligible pixel, as a fraction of the
    /// largest NCD.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    0.05
}

impl RoiConfig {
    /// Every target class `1..=K`.
    pub fn all_targets(classes: usize) -> Self {
        RoiConfig { targets: (1..=classes).collect(), floor: default_floor() }
    }
}

/// Normalized sampling probabilities over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiMap {
    pub rows: usize,
    pub cols: usize,
    pub m: Vec<f64>,
}

impl RoiMap {
    /// Normalizes non-negative scores.
    pub fn from_scores(rows: usize, cols: usize, scores: Vec<f64>) -> Result<Self> {
        if scores.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} scores for a {rows}x{cols} grid", scores.len())));
        }
        if scores.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::invalid("roi scores", "must be finite and non-negative"));
        }
        let total: f64 = scores.iter().sum();
        if total <= 0.0 {
            return Err(Error::ScanComplete);
        }
        Ok(RoiMap { rows, cols, m: scores.into_iter().map(|s| s / total).collect() })
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        let n = rows * cols;
        RoiMap { rows, cols, m: vec![1.0 / n as f64; n] }
    }

    pub fn pixels(&self) -> usize {
        self.m.len()
    }

    pub fn support(&self) -> usize {
        self.m.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn max(&self) -> f64 {
        self.m.iter().copied().fold(0.0, f64::max)
    }
}

/// `s_n = 1{label_n ∈ targets} ncd_n + floor · max_ncd`, raised to `max_ncd`
/// where no estimate exists and zeroed where the dwell budget is spent.
pub fn build_roi(labels: &DenseField, ncd: &DenseField, cfg: &RoiConfig, dwell: &[f64], max_dwell: f64) -> Result<RoiMap> {
    let n = labels.values.len();
    if ncd.values.len() != n || dwell.len() != n {
        return Err(Error::DimensionMismatch("label, NCD and dwell grids differ".into()));
    }
    let observed = ncd
        .values
        .iter()
        .zip(&ncd.filled)
        .filter(|(_, &f)| f)
        .map(|(&v, _)| v)
        .fold(0.0, f64::max);
    let max_ncd = if observed > 0.0 { observed } else { 1.0 };
    let scores = (0..n)
        .map(|i| {
            if dwell[i] >= max_dwell {
                0.0
            } else if !labels.filled[i] || !ncd.filled[i] {
                max_ncd
            } else {
                let label = labels.values[i].round() as usize;
                let hit = if cfg.targets.contains(&label) { ncd.values[i].max(0.0) } else { 0.0 };
                hit + cfg.floor * max_ncd
            }
        })
        .collect();
    RoiMap::from_scores(labels.rows, labels.cols, scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(v: Vec<f64>) -> DenseField {
        let n = v.len();
        DenseField { rows: 1, cols: n, values: v, filled: vec![true; n] }
    }

    #[test]
    fn all_at_max_dwell_is_complete() {
        let cfg = RoiConfig::all_targets(1);
        let r = build_roi(&dense(vec![1.0; 4]), &dense(vec![1.0; 4]), &cfg, &[2.0; 4], 2.0);
        assert!(matches!(r, Err(Error::ScanComplete)));
    }

    #[test]
    fn single_uncertain_target_is_a_delta() {
        let cfg = RoiConfig { targets: vec![1], floor: 0.0 };
        let roi = build_roi(&dense(vec![1.0; 4]), &dense(vec![0.0, 0.0, 1.0, 0.0]), &cfg, &[0.0; 4], 1.0).unwrap();
        assert_eq!(roi.m, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn uniform_ncd_gives_uniform_map() {
        let cfg = RoiConfig::all_targets(2);
        let roi = build_roi(&dense(vec![2.0; 8]), &dense(vec![0.7; 8]), &cfg, &[0.0; 8], 1.0).unwrap();
        assert!(roi.m.iter().all(|&p| (p - 0.125).abs() < 1e-15));
    }

    #[test]
    fn unfilled_pixels_get_the_largest_score() {
        let cfg = RoiConfig { targets: vec![1], floor: 0.0 };
        let mut ncd = dense(vec![0.5, 2.0, 0.0]);
        ncd.filled[2] = false;
        let roi = build_roi(&dense(vec![1.0, 1.0, 1.0]), &ncd, &cfg, &[0.0; 3], 1.0).unwrap();
        assert!((roi.m[2] - roi.m[1]).abs() < 1e-15);
    }
}
