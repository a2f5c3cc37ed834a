//! Row-compressed sparse matrices.
//!
//! Column indices are strictly increasing within each row. Matrix-vector
//! products parallelize over rows; each row is reduced sequentially, so the
//! result does not depend on the thread count.

use nalgebra::DMatrix;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// entries that sum to exactly zero are dropped.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<SparseMatrix> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({i}, {j}) outside a {n_rows} x {n_cols} matrix"
                )));
            }
            rows[i].push((j, v));
        }
        let rows = rows
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|&(j, _)| j);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
                for (j, v) in row {
                    match merged.last_mut() {
                        Some((jj, vv)) if *jj == j => *vv += v,
                        _ => merged.push((j, v)),
                    }
                }
                merged.retain(|&(_, v)| v != 0.0);
                merged
            })
            .collect();
        Ok(SparseMatrix::from_rows(n_rows, n_cols, rows))
    }

    /// Builds from per-row (column, value) lists with strictly increasing
    /// column indices. Explicit zeros are kept, so assembled matrices retain
    /// the full adjacency pattern even when entries cancel.
    pub fn from_rows(n_rows: usize, n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> SparseMatrix {
        debug_assert_eq!(rows.len(), n_rows);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (j, v) in row {
                debug_assert!(j < n_cols);
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> SparseMatrix {
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> SparseMatrix {
        SparseMatrix::from_rows(n, n, (0..n).map(|i| vec![(i, 1.0)]).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                rows[j].push((i, v));
            }
        }
        // Scanning rows in order keeps each transposed row already sorted.
        SparseMatrix::from_rows(self.n_cols, self.n_rows, rows)
    }

    /// `self + alpha * other`, matching patterns entry by entry.
    pub fn add_scaled(&self, other: &SparseMatrix, alpha: f64) -> Result<SparseMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{} x {} + {} x {}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let rows = (0..self.n_rows)
            .map(|i| {
                let (ca, va) = self.row(i);
                let (cb, vb) = other.row(i);
                let mut out = Vec::with_capacity(ca.len() + cb.len());
                let (mut p, mut q) = (0, 0);
                while p < ca.len() || q < cb.len() {
                    match (ca.get(p), cb.get(q)) {
                        (Some(&ja), Some(&jb)) if ja == jb => {
                            out.push((ja, va[p] + alpha * vb[q]));
                            p += 1;
                            q += 1;
                        }
                        (Some(&ja), Some(&jb)) if ja < jb => {
                            out.push((ja, va[p]));
                            p += 1;
                        }
                        (Some(_), Some(&jb)) => {
                            out.push((jb, alpha * vb[q]));
                            q += 1;
                        }
                        (Some(&ja), None) => {
                            out.push((ja, va[p]));
                            p += 1;
                        }
                        (None, Some(&jb)) => {
                            out.push((jb, alpha * vb[q]));
                            q += 1;
                        }
                        (None, None) => unreachable!(),
                    }
                }
                out
            })
            .collect();
        Ok(SparseMatrix::from_rows(self.n_rows, self.n_cols, rows))
    }

    pub fn scale(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out
    }

    fn matvec_row(&self, i: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        let mut sum = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            sum += v * x[j];
        }
        sum
    }

    /// `y = A x`; parallel over rows when the `parallel` feature is enabled.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        #[cfg(feature = "parallel")]
        {
            if self.n_rows >= 4096 {
                return (0..self.n_rows)
                    .into_par_iter()
                    .map(|i| self.matvec_row(i, x))
                    .collect();
            }
        }
        self.matvec_seq(x)
    }

    /// Sequential matrix-vector product; the reference path for benchmarks.
    pub fn matvec_seq(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols, "matvec dimension mismatch");
        (0..self.n_rows).map(|i| self.matvec_row(i, x)).collect()
    }

    /// Exact structural and value symmetry.
    pub fn is_symmetric(&self) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j > i && self.get(j, i) != v {
                    return false;
                }
            }
        }
        true
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }

    /// Power-iteration estimate of the spectral norm, iterating on `A^T A`
    /// from the normalized all-ones vector.
    pub fn two_norm_est(&self, max_iters: usize, tol: f64) -> f64 {
        if self.nnz() == 0 || self.n_rows == 0 {
            return 0.0;
        }
        let at = self.transpose();
        let mut x = vec![1.0 / (self.n_cols as f64).sqrt(); self.n_cols];
        let mut sigma2 = 0.0;
        for _ in 0..max_iters {
            let y = at.matvec(&self.matvec(&x));
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let prev = sigma2;
            sigma2 = norm;
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / norm;
            }
            if (sigma2 - prev).abs() <= tol * sigma2 {
                break;
            }
        }
        sigma2.sqrt()
    }

    /// Principal submatrix on the ordered index list `selection` (the action
    /// of a row-selection projection applied on both sides).
    pub fn principal_submatrix(&self, selection: &[usize]) -> SparseMatrix {
        let mut dest = vec![usize::MAX; self.n_cols];
        for (r, &k) in selection.iter().enumerate() {
            dest[k] = r;
        }
        let rows = selection
            .iter()
            .map(|&k| {
                let (cols, vals) = self.row(k);
                let mut row: Vec<(usize, f64)> = cols
                    .iter()
                    .zip(vals)
                    .filter(|(&j, _)| dest[j] != usize::MAX)
                    .map(|(&j, &v)| (dest[j], v))
                    .collect();
                row.sort_by_key(|&(j, _)| j);
                row
            })
            .collect();
        SparseMatrix::from_rows(selection.len(), selection.len(), rows)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - other.get(i, j)).abs());
            }
            let (cols, vals) = other.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(i, j)).abs());
            }
        }
        worst
    }
}

/// Semantic equality: same shape and same entries, ignoring explicit zeros.
impl PartialEq for SparseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.max_abs_diff(other) == 0.0
    }
}
