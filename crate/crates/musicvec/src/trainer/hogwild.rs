//! Lock-free shared weight matrix for hogwild-style parallel SGD.

use std::sync::atomic::{AtomicU64, Ordering};

/// Dense row-major f64 matrix whose cells are updated through relaxed
/// atomics. Concurrent read-modify-write may lose updates — the SGD the
/// trainer runs tolerates that — while single-threaded use is exactly
/// equivalent to plain loads and stores.
pub struct SharedMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let cells = (0..rows * cols)
            .map(|_| AtomicU64::new(0f64.to_bits()))
            .collect();
        SharedMatrix { rows, cols, cells }
    }

    /// Builds a matrix by evaluating `f(row, col)` in row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                cells.push(AtomicU64::new(f(r, c).to_bits()));
            }
        }
        SharedMatrix { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn cell(&self, row: usize, col: usize) -> &AtomicU64 {
        &self.cells[row * self.cols + col]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        f64::from_bits(self.cell(row, col).load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, row: usize, col: usize, value: f64) {
        self.cell(row, col).store(value.to_bits(), Ordering::Relaxed);
    }

    /// Copies row `row` into `out` (length must equal `cols`).
    pub fn copy_row_into(&self, row: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cols);
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = self.get(row, c);
        }
    }

    pub fn row_vec(&self, row: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.copy_row_into(row, &mut out);
        out
    }

    /// Dot product of row `row` with `v`.
    #[inline]
    pub fn dot_row(&self, row: usize, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.cols);
        let mut sum = 0.0;
        for (c, &x) in v.iter().enumerate() {
            sum += self.get(row, c) * x;
        }
        sum
    }

    /// row += scale * v (read-modify-write per cell, racy by design).
    #[inline]
    pub fn axpy_row(&self, row: usize, scale: f64, v: &[f64]) {
        debug_assert_eq!(v.len(), self.cols);
        for (c, &x) in v.iter().enumerate() {
            self.set(row, c, self.get(row, c) + scale * x);
        }
    }

    /// out += scale * row.
    #[inline]
    pub fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.cols);
        for (c, slot) in out.iter_mut().enumerate() {
            *slot += scale * self.get(row, c);
        }
    }

    /// Snapshot of the whole matrix in row-major order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| f64::from_bits(c.load(Ordering::Relaxed)))
            .collect()
    }

    /// Exact bit pattern of every cell, for byte-level reproducibility checks.
    pub fn to_bits(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }
}
