use crate::error::{Error, Result};
use crate::inference::Engine;
use crate::scene::{GroundTruthScene, HistogramCube};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Dense reference depth (bins) and class maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMaps {
    pub rows: usize,
    pub cols: usize,
    pub depth: Vec<f64>,
    pub class: Vec<usize>,
}

impl ReferenceMaps {
    pub fn from_scene(scene: &GroundTruthScene) -> Self {
        ReferenceMaps {
            rows: scene.rows,
            cols: scene.cols,
            depth: scene.depth.iter().map(|&d| d as f64).collect(),
            class: scene.class.clone(),
        }
    }

    /// Estimates from a fully exposed cube; unexposed pixels count as
    /// background.
    pub fn from_cube(cube: &HistogramCube, engine: &Engine) -> Result<Self> {
        let pixels: Vec<usize> = (0..cube.pixels()).collect();
        let mut depth = vec![0.0; cube.pixels()];
        let mut class = vec![0; cube.pixels()];
        for (n, est) in engine.estimate_pixels(cube, &pixels).into_iter().enumerate() {
            match est {
                Ok(e) => {
                    depth[n] = e.depth as f64;
                    class[n] = e.label;
                }
                Err(Error::NoData(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(ReferenceMaps { rows: cube.rows(), cols: cube.cols(), depth, class })
    }

    pub fn pixels(&self) -> usize {
        self.class.len()
    }

    pub fn target_pixels(&self) -> usize {
        self.class.iter().filter(|&&u| u != 0).count()
    }
}

/// Depth RMSE (bins) over pixels where the reference has a target.
pub fn depth_rmse(depth: &[f64], reference: &ReferenceMaps) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for ((&d, &r), &u) in depth.iter().zip(&reference.depth).zip(&reference.class) {
        if u != 0 {
            s += (d - r) * (d - r);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Converts a depth in bins to metres for a histogram bin width in seconds.
pub fn bins_to_metres(bins: f64, bin_width: f64) -> f64 {
    bins * bin_width * SPEED_OF_LIGHT / 2.0
}

/// `(K+1) x (K+1)` counts, rows indexed by the true class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix { counts: vec![vec![0; classes + 1]; classes + 1] }
    }

    pub fn from_labels(classes: usize, truth: &[usize], predicted: &[usize]) -> Self {
        let mut m = Self::new(classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.counts[t.min(classes)][p.min(classes)] += 1;
        }
        m
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, k: usize) -> u64 {
        self.counts[k].iter().sum()
    }

    pub fn col_total(&self, k: usize) -> u64 {
        self.counts.iter().map(|r| r[k]).sum()
    }

    /// Fraction of class-`k` pixels labelled `k`.
    pub fn recall(&self, k: usize) -> f64 {
        ratio(self.counts[k][k], self.row_total(k))
    }

    /// Fraction of pixels labelled `k` that are class `k`.
    pub fn precision(&self, k: usize) -> f64 {
        ratio(self.counts[k][k], self.col_total(k))
    }

    /// Overall fraction on the diagonal.
    pub fn accuracy(&self) -> f64 {
        ratio((0..self.counts.len()).map(|k| self.counts[k][k]).sum(), self.total())
    }

    /// Target-versus-background accuracy `(TP + TN) / (TP + TN + FP + FN)`.
    pub fn detection_accuracy(&self) -> f64 {
        let tn = self.counts[0][0];
        let tp: u64 = self.counts.iter().skip(1).map(|r| r.iter().skip(1).sum::<u64>()).sum();
        ratio(tp + tn, self.total())
    }

    pub fn to_csv(&self) -> String {
        let k = self.counts.len();
        let mut s = String::from("true\\pred");
        for j in 0..k {
            s.push_str(&format!(",{j}"));
        }
        s.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            s.push_str(&i.to_string());
            for v in row {
                s.push_str(&format!(",{v}"));
            }
            s.push('\n');
        }
        s
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Quality of one depth/label estimate against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub rmse_bins: f64,
    pub rmse_m: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

pub fn metrics(depth: &[f64], labels: &[usize], reference: &ReferenceMaps, classes: usize, bin_width: f64) -> Metrics {
    let rmse_bins = depth_rmse(depth, reference);
    let confusion = ConfusionMatrix::from_labels(classes, &reference.class, labels);
    Metrics { rmse_bins, rmse_m: bins_to_metres(rmse_bins, bin_width), accuracy: confusion.accuracy(), confusion }
}
