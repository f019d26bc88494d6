use crate::error::{Error, Result};

/// Per-pixel optional values on a `rows x cols` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseField {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Option<f64>>,
}

impl SparseField {
    pub fn empty(rows: usize, cols: usize) -> Self {
        SparseField { rows, cols, values: vec![None; rows * cols] }
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} values for a {rows}x{cols} grid", values.len())));
        }
        Ok(SparseField { rows, cols, values })
    }

    pub fn dense(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        SparseField { rows, cols, values: values.iter().map(|&v| Some(v)).collect() }
    }

    pub fn set(&mut self, n: usize, v: f64) {
        self.values[n] = Some(v);
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values[n]
    }

    pub fn available(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }
}

/// Fully populated field; `filled[n]` is false where inpainting found no
/// neighbour and the value is only a placeholder.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseField {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub filled: Vec<bool>,
}

impl DenseField {
    pub fn constant(rows: usize, cols: usize, v: f64) -> Self {
        DenseField { rows, cols, values: vec![v; rows * cols], filled: vec![true; rows * cols] }
    }

    pub fn is_complete(&self) -> bool {
        self.filled.iter().all(|&f| f)
    }

    pub fn unfilled(&self) -> usize {
        self.filled.iter().filter(|&&f| !f).count()
    }

    /// Replaces every placeholder with `v`.
    pub fn fill_remaining(&mut self, v: f64) {
        for (x, &f) in self.values.iter_mut().zip(&self.filled) {
            if !f {
                *x = v;
            }
        }
    }

    pub fn to_sparse(&self) -> SparseField {
        SparseField {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&self.filled).map(|(&v, &f)| f.then_some(v)).collect(),
        }
    }
}
