//! Dense complex matrices in row-major order.
//!
//! Rows index azimuth (pulses, slow time) and columns index slant range
//! (fast-time samples) throughout the crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexVector = Vec<Complex64>;

/// Raw echo samples: one row per transmitted pulse.
pub type RawDataMatrix = ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::param(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[Complex64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (r, v) in values.iter().enumerate() {
            self.data[r * self.cols + c] = *v;
        }
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        ComplexMatrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Row and column of the largest-magnitude sample (first one on ties).
    pub fn argmax_abs(&self) -> (usize, usize) {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in self.data.iter().enumerate() {
            let m = v.norm_sqr();
            if m > best_val {
                best_val = m;
                best = i;
            }
        }
        (best / self.cols, best % self.cols)
    }

    pub fn add_assign(&mut self, other: &ComplexMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::param(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(())
    }

    /// Copy of the sub-block starting at (`row0`, `col0`).
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Result<ComplexMatrix> {
        if row0 + rows > self.rows || col0 + cols > self.cols {
            return Err(Error::param(format!(
                "block {rows}x{cols} at ({row0},{col0}) exceeds {}x{}",
                self.rows, self.cols
            )));
        }
        ComplexMatrix::from_fn(rows, cols, |r, c| self.get(row0 + r, col0 + c))
    }
}

/// Inner product `a^H b`.
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators; fixed order keeps results bit-stable.
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for j in 0..4 {
            let x = a[4 * i + j];
            let y = b[4 * i + j];
            acc[j] += x.conj() * y;
        }
    }
    let mut tail = Complex64::new(0.0, 0.0);
    for i in 4 * chunks..a.len() {
        tail += a[i].conj() * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
