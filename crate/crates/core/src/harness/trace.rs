use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::metrics::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::reconstruct::RoiMap;
use crate::sampler::{ScanPlan, StopReason};

/// One iteration (or static pass) of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: u64,
    /// Cumulative acquisition time.
    pub dwell_s: f64,
    /// Cumulative acquisition, mirror travel and processing time.
    pub total_s: f64,
    pub rmse_bins: f64,
    pub rmse_m: f64,
    pub acc: f64,
    /// Distinct pixels scanned so far.
    pub scanned: usize,
}

/// Maps at one point of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub iteration: u64,
    /// Accumulated dwell per pixel (seconds).
    pub samples: Vec<f64>,
    pub depth: Vec<f64>,
    pub labels: Vec<usize>,
    pub ncd: Vec<f64>,
    pub roi: Option<RoiMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTrace {
    pub rows: Vec<TraceRow>,
    pub confusion: Vec<ConfusionMatrix>,
    pub plans: Vec<ScanPlan>,
    pub stop: StopReason,
    pub last: Snapshot,
    pub snapshots: Vec<Snapshot>,
}

impl ExperimentTrace {
    pub fn final_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Cumulative dwell at the first row whose RMSE is at most `rmse`.
    pub fn dwell_to_reach(&self, rmse: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.rmse_bins <= rmse).map(|r| r.dwell_s)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for row in &self.rows {
            wr.serialize(row)?;
        }
        wr.flush().map_err(|e| Error::io("<trace>", e))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
