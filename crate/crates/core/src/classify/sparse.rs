use crate::error::{Error, Result};

/// Compressed sparse rows over a fixed column count.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRows {
    pub fn new(cols: usize) -> Self {
        SparseRows {
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a row given as strictly increasing column indices.
    pub fn push_row(&mut self, indices: &[u32], values: &[f64]) -> Result<()> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                actual: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) || indices.last().is_some_and(|&c| c as usize >= self.cols) {
            return Err(Error::invalid("row indices must be increasing and inside the column range"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("feature row {}", self.rows()),
            });
        }
        self.indices.extend_from_slice(indices);
        self.values.extend_from_slice(values);
        self.indptr.push(self.indices.len());
        Ok(())
    }

    pub fn from_dense(cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut m = Self::new(cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            let (idx, val): (Vec<u32>, Vec<f64>) = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as u32, *v))
                .unzip();
            m.push_row(&idx, &val)?;
        }
        Ok(m)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn to_dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        let (idx, val) = self.row(r);
        for (&i, &v) in idx.iter().zip(val) {
            out[i as usize] = v;
        }
        out
    }

    /// Copies the given rows, in order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut m = Self::new(self.cols);
        for &r in rows {
            let (idx, val) = self.row(r);
            m.indices.extend_from_slice(idx);
            m.values.extend_from_slice(val);
            m.indptr.push(m.indices.len());
        }
        m
    }
}
