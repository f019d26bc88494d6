use rayon::prelude::*;

use super::field::{DenseField, SparseField};
use crate::error::{Error, Result};

/// How missing values are synthesized from their neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillRule {
    Median,
    /// Most frequent value, ties to the smallest; for categorical labels.
    Mode,
}

/// Median of a non-empty slice; mean of the two middle values for even
/// lengths.
pub fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    values.sort_by(f64::total_cmp);
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn mode(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let (mut best, mut best_run) = (values[0], 0);
    let mut i = 0;
    while i < values.len() {
        let mut j = i;
        while j < values.len() && values[j] == values[i] {
            j += 1;
        }
        if j - i > best_run {
            best = values[i];
            best_run = j - i;
        }
        i = j;
    }
    best
}

/// Fills missing pixels from available neighbours in `3^w x 3^w` windows,
/// `w = 1..=max_wind`, stopping at the first window with any neighbour.
pub fn inpaint_with(field: &SparseField, max_wind: u32, rule: FillRule) -> Result<DenseField> {
    if field.available() == 0 {
        return Err(Error::EmptyField);
    }
    let (rows, cols) = (field.rows, field.cols);
    let filled: Vec<(f64, bool)> = (0..rows * cols)
        .into_par_iter()
        .map(|n| {
            if let Some(v) = field.values[n] {
                return (v, true);
            }
            let (r, c) = ((n / cols) as isize, (n % cols) as isize);
            let mut buf = Vec::new();
            for w in 1..=max_wind {
                let half = (3isize.pow(w) - 1) / 2;
                buf.clear();
                for i in (r - half).max(0)..=(r + half).min(rows as isize - 1) {
                    for j in (c - half).max(0)..=(c + half).min(cols as isize - 1) {
                        if let Some(v) = field.values[i as usize * cols + j as usize] {
                            buf.push(v);
                        }
                    }
                }
                if !buf.is_empty() {
                    let v = match rule {
                        FillRule::Median => median(&mut buf),
                        FillRule::Mode => mode(&mut buf),
                    };
                    return (v, true);
                }
            }
            (f64::NAN, false)
        })
        .collect();
    let (values, filled) = filled.into_iter().unzip();
    Ok(DenseField { rows, cols, values, filled })
}

/// Median inpainting for continuous fields (depth, NCD).
pub fn inpaint(field: &SparseField, max_wind: u32) -> Result<DenseField> {
    inpaint_with(field, max_wind, FillRule::Median)
}

/// Mode inpainting for label fields.
pub fn inpaint_labels(field: &SparseField, max_wind: u32) -> Result<DenseField> {
    inpaint_with(field, max_wind, FillRule::Mode)
}
