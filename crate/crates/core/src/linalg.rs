//! Dense column-major matrices and a column-pivoted Householder QR.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Rank threshold on `|R_kk| / |R_00|` after column normalisation.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally long columns.
    ///
    /// Panics if the columns differ in length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols);
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, values[i * cols + j]);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn push_column(&mut self, values: &[f64]) {
        if self.cols == 0 && self.rows == 0 {
            self.rows = values.len();
        }
        assert_eq!(values.len(), self.rows, "column length mismatch");
        self.data.extend_from_slice(values);
        self.cols += 1;
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for j in 0..self.cols {
            let c = self.col(j);
            data.extend(idx.iter().map(|&i| c[i]));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn row_range(&self, range: Range<usize>) -> Matrix {
        let mut data = Vec::with_capacity(range.len() * self.cols);
        for j in 0..self.cols {
            data.extend_from_slice(&self.col(j)[range.clone()]);
        }
        Matrix {
            rows: range.len(),
            cols: self.cols,
            data,
        }
    }

    /// Returns `[1 | self]`.
    pub fn with_intercept(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        data.extend(std::iter::repeat_n(1.0, self.rows));
        data.extend_from_slice(&self.data);
        Matrix {
            rows: self.rows,
            cols: self.cols + 1,
            data,
        }
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &b) in v.iter().enumerate() {
            if b != 0.0 {
                for (o, x) in out.iter_mut().zip(self.col(j)) {
                    *o += b * x;
                }
            }
        }
        out
    }

    /// `selfᵀ * v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation (divides by `n`).
pub fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Column-pivoted Householder QR of a column-normalised copy of `A`.
///
/// Normalising first makes the rank test invariant to column scaling.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    qr: Matrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
    scale: Vec<f64>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &Matrix) -> Self {
        let (n, m) = (a.rows(), a.cols());
        let mut qr = a.clone();
        let mut scale = vec![1.0; m];
        for (j, s) in scale.iter_mut().enumerate() {
            let norm = dot(qr.col(j), qr.col(j)).sqrt();
            if norm > 0.0 {
                *s = norm;
                qr.col_mut(j).iter_mut().for_each(|v| *v /= norm);
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        let steps = n.min(m);
        let mut tau = vec![0.0; steps];
        let mut r00 = 0.0;
        let mut rank = steps;
        for k in 0..steps {
            // pivot: largest remaining norm in rows k..n
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..m {
                let c = &qr.col(j)[k..];
                let s = dot(c, c);
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..n {
                    let t = qr.get(i, k);
                    qr.set(i, k, qr.get(i, best));
                    qr.set(i, best, t);
                }
                perm.swap(k, best);
                scale.swap(k, best);
            }
            let alpha = best_norm.max(0.0).sqrt();
            if k == 0 {
                r00 = alpha;
            }
            if alpha == 0.0 || alpha <= RANK_TOLERANCE * r00 {
                rank = k;
                break;
            }
            // Householder vector v with v[0] = 1 stored below the diagonal.
            let x0 = qr.get(k, k);
            let beta = if x0 >= 0.0 { -alpha } else { alpha };
            let v0 = x0 - beta;
            for i in k + 1..n {
                let v = qr.get(i, k) / v0;
                qr.set(i, k, v);
            }
            tau[k] = (beta - x0) / beta;
            qr.set(k, k, beta);
            for j in k + 1..m {
                let mut s = qr.get(k, j);
                for i in k + 1..n {
                    s += qr.get(i, k) * qr.get(i, j);
                }
                s *= tau[k];
                qr.set(k, j, qr.get(k, j) - s);
                for i in k + 1..n {
                    let v = qr.get(i, j) - s * qr.get(i, k);
                    qr.set(i, j, v);
                }
            }
        }
        Self {
            qr,
            tau,
            perm,
            scale,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.qr.cols()
    }

    /// Original index of the first column the decomposition could not use.
    pub fn dependent_column(&self) -> Option<usize> {
        (!self.is_full_rank()).then(|| self.perm[self.rank])
    }

    fn apply_qt(&self, y: &mut [f64]) {
        let n = self.qr.rows();
        for k in 0..self.rank {
            let mut s = y[k];
            for i in k + 1..n {
                s += self.qr.get(i, k) * y[i];
            }
            s *= self.tau[k];
            y[k] -= s;
            for i in k + 1..n {
                y[i] -= s * self.qr.get(i, k);
            }
        }
    }

    /// Least-squares solution of `A x = y`; requires full column rank.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        assert!(self.is_full_rank());
        let m = self.qr.cols();
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);
        let mut z = vec![0.0; m];
        for k in (0..m).rev() {
            let mut s = qty[k];
            for j in k + 1..m {
                s -= self.qr.get(k, j) * z[j];
            }
            z[k] = s / self.qr.get(k, k);
        }
        let mut beta = vec![0.0; m];
        for k in 0..m {
            beta[self.perm[k]] = z[k] / self.scale[k];
        }
        beta
    }

    /// `(AᵀA)⁻¹` in the original column order, row-major `m × m`.
    pub fn gram_inverse(&self) -> Vec<f64> {
        assert!(self.is_full_rank());
        let m = self.qr.cols();
        // R⁻¹ (upper triangular), row-major
        let mut rinv = vec![0.0; m * m];
        for j in 0..m {
            rinv[j * m + j] = 1.0 / self.qr.get(j, j);
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in i + 1..=j {
                    s += self.qr.get(i, k) * rinv[k * m + j];
                }
                rinv[i * m + j] = -s / self.qr.get(i, i);
            }
        }
        let mut out = vec![0.0; m * m];
        for a in 0..m {
            for b in a..m {
                let mut s = 0.0;
                for k in b..m {
                    s += rinv[a * m + k] * rinv[b * m + k];
                }
                let (pa, pb) = (self.perm[a], self.perm[b]);
                let v = s / (self.scale[a] * self.scale[b]);
                out[pa * m + pb] = v;
                out[pb * m + pa] = v;
            }
        }
        out
    }
}
