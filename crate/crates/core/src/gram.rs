//! Cross-product summaries of row blocks.
//!
//! Cross-validated refits of least-squares and LASSO models only need
//! `Σx`, `Σy`, `XᵀX`, `Xᵀy` and `yᵀy` over each training window. These are
//! accumulated once per segment, after shifting every column by its overall
//! mean to limit cancellation. Validation errors are still computed from the
//! rows themselves.

use std::ops::Range;

use crate::cv::{ordered_mean, CvPlan};
use crate::error::{Error, Result};
use crate::exec::par_map_range;
use crate::linalg::{dot, Matrix};

const CHUNK: usize = 256;

/// Sums over a block of rows, in shifted coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub n: usize,
    pub sx: Vec<f64>,
    pub sy: f64,
    /// Row-major `m × m`, both triangles filled.
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yy: f64,
}

impl Block {
    fn zero(m: usize) -> Self {
        Self {
            n: 0,
            sx: vec![0.0; m],
            sy: 0.0,
            xx: vec![0.0; m * m],
            xy: vec![0.0; m],
            yy: 0.0,
        }
    }

    pub fn m(&self) -> usize {
        self.sx.len()
    }

    fn add(&mut self, o: &Block) {
        self.n += o.n;
        self.sy += o.sy;
        self.yy += o.yy;
        for (a, b) in self.sx.iter_mut().zip(&o.sx) {
            *a += b;
        }
        for (a, b) in self.xy.iter_mut().zip(&o.xy) {
            *a += b;
        }
        for (a, b) in self.xx.iter_mut().zip(&o.xx) {
            *a += b;
        }
    }

    /// Centred second moments of the selected columns. Means are in
    /// shifted coordinates.
    fn centered(&self, cols: &[usize]) -> Centered {
        let m = self.m();
        let n = self.n as f64;
        let mean_x: Vec<f64> = cols.iter().map(|&c| self.sx[c] / n).collect();
        let mean_y = self.sy / n;
        let k = cols.len();
        let mut cxx = vec![0.0; k * k];
        for (a, &ca) in cols.iter().enumerate() {
            for (b, &cb) in cols.iter().enumerate() {
                cxx[a * k + b] = self.xx[ca * m + cb] - n * mean_x[a] * mean_x[b];
            }
        }
        let cxy = cols
            .iter()
            .enumerate()
            .map(|(a, &c)| self.xy[c] - n * mean_x[a] * mean_y)
            .collect();
        Centered {
            n: self.n,
            mean_x,
            mean_y,
            cxx,
            cxy,
            cyy: self.yy - n * mean_y * mean_y,
        }
    }
}

/// Centred moments of a column subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Centered {
    pub n: usize,
    pub mean_x: Vec<f64>,
    pub mean_y: f64,
    /// Row-major `k × k`.
    pub cxx: Vec<f64>,
    pub cxy: Vec<f64>,
    pub cyy: f64,
}

impl Centered {
    pub fn k(&self) -> usize {
        self.mean_x.len()
    }

    /// OLS slopes with an intercept by Cholesky on the centred normal
    /// equations. Returns `(intercept, slopes)` or the index of the first
    /// column found linearly dependent on earlier ones.
    pub fn ols(&self) -> std::result::Result<(f64, Vec<f64>), usize> {
        let k = self.k();
        if self.n <= k + 1 {
            return Err(k.saturating_sub(1));
        }
        // scale to a correlation matrix so the pivot test is relative
        let scale: Vec<f64> = (0..k).map(|i| self.cxx[i * k + i].max(0.0).sqrt()).collect();
        if let Some(i) = scale.iter().position(|s| *s == 0.0) {
            return Err(i);
        }
        let mut l = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let mut s = self.cxx[i * k + j] / (scale[i] * scale[j]);
                for p in 0..j {
                    s -= l[i * k + p] * l[j * k + p];
                }
                if i == j {
                    if s <= 1e-10 {
                        return Err(i);
                    }
                    l[i * k + i] = s.sqrt();
                } else {
                    l[i * k + j] = s / l[j * k + j];
                }
            }
        }
        let rhs: Vec<f64> = (0..k).map(|i| self.cxy[i] / scale[i]).collect();
        let mut z = vec![0.0; k];
        for i in 0..k {
            let mut s = rhs[i];
            for p in 0..i {
                s -= l[i * k + p] * z[p];
            }
            z[i] = s / l[i * k + i];
        }
        let mut b = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = z[i];
            for p in i + 1..k {
                s -= l[p * k + i] * b[p];
            }
            b[i] = s / l[i * k + i];
        }
        for i in 0..k {
            b[i] /= scale[i];
        }
        let a = self.mean_y - dot(&b, &self.mean_x);
        Ok((a, b))
    }
}

/// Training-window sums for every split of a plan.
#[derive(Debug, Clone)]
pub struct CrossProducts {
    shift_x: Vec<f64>,
    shift_y: f64,
    plan: CvPlan,
    train: Vec<Block>,
    /// Rows of the last training window plus its validation block.
    fitting: Block,
}

fn accumulate(z: &Matrix, yz: &[f64], rows: Range<usize>) -> Block {
    let m = z.cols();
    let mut b = Block::zero(m);
    b.n = rows.len();
    let mut start = rows.start;
    while start < rows.end {
        let end = (start + CHUNK).min(rows.end);
        let yc = &yz[start..end];
        let upper: Vec<Vec<f64>> = par_map_range(m, |i| {
            let ci = &z.col(i)[start..end];
            (i..m).map(|j| dot(ci, &z.col(j)[start..end])).collect()
        });
        for (i, row) in upper.iter().enumerate() {
            for (off, v) in row.iter().enumerate() {
                b.xx[i * m + i + off] += v;
            }
            let ci = &z.col(i)[start..end];
            b.sx[i] += ci.iter().sum::<f64>();
            b.xy[i] += dot(ci, yc);
        }
        b.sy += yc.iter().sum::<f64>();
        b.yy += dot(yc, yc);
        start = end;
    }
    for i in 0..m {
        for j in 0..i {
            b.xx[i * m + j] = b.xx[j * m + i];
        }
    }
    b
}

impl CrossProducts {
    /// Training windows must be prefixes `0..end` of non-decreasing length.
    pub fn new(x: &Matrix, y: &[f64], plan: &CvPlan) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::LengthMismatch {
                expected: x.rows(),
                actual: y.len(),
            });
        }
        plan.validate(x.rows())?;
        let end = plan.fitting_range().end;
        let n = end as f64;
        let mut z = x.row_range(0..end);
        let mut shift_x = Vec::with_capacity(x.cols());
        for j in 0..z.cols() {
            let c = z.col_mut(j);
            let mu = c.iter().sum::<f64>() / n;
            for v in c.iter_mut() {
                *v -= mu;
            }
            shift_x.push(mu);
        }
        let shift_y = y[..end].iter().sum::<f64>() / n;
        let yz: Vec<f64> = y[..end].iter().map(|v| v - shift_y).collect();

        let mut train = Vec::with_capacity(plan.len());
        let mut prefix = Block::zero(x.cols());
        for s in &plan.splits {
            if s.train.start != 0 || s.train.end < prefix.n {
                return Err(Error::InvalidArgument(
                    "training windows must be growing prefixes".into(),
                ));
            }
            prefix.add(&accumulate(&z, &yz, prefix.n..s.train.end));
            train.push(prefix.clone());
        }
        let mut fitting = prefix;
        fitting.add(&accumulate(&z, &yz, fitting.n..end));
        Ok(Self {
            shift_x,
            shift_y,
            plan: plan.clone(),
            train,
            fitting,
        })
    }

    pub fn plan(&self) -> &CvPlan {
        &self.plan
    }

    pub fn n_cols(&self) -> usize {
        self.shift_x.len()
    }

    fn raw(&self, mut c: Centered, cols: &[usize]) -> Centered {
        for (m, &j) in c.mean_x.iter_mut().zip(cols) {
            *m += self.shift_x[j];
        }
        c.mean_y += self.shift_y;
        c
    }

    /// Centred moments of `cols` over split `k`'s training window, with
    /// means on the original scale.
    pub fn train_moments(&self, k: usize, cols: &[usize]) -> Centered {
        self.raw(self.train[k].centered(cols), cols)
    }

    /// Centred moments over the whole fitting range.
    pub fn fitting_moments(&self, cols: &[usize]) -> Centered {
        self.raw(self.fitting.centered(cols), cols)
    }

    /// Mean validation RMSE of intercept-plus-`cols` OLS refitted per split.
    /// Fails with the dependent column when a split is rank deficient.
    pub fn ols_score(&self, x: &Matrix, y: &[f64], cols: &[usize]) -> std::result::Result<f64, usize> {
        let mut scores = Vec::with_capacity(self.train.len());
        for (k, s) in self.plan.splits.iter().enumerate() {
            let (a, b) = self.train_moments(k, cols).ols().map_err(|i| cols[i])?;
            scores.push(validation_rmse(x, y, s.validation.clone(), cols, a, &b));
        }
        Ok(ordered_mean(&scores))
    }
}

/// RMSE of `a + Σ b_k x_{cols[k]}` on `rows`.
pub fn validation_rmse(x: &Matrix, y: &[f64], rows: Range<usize>, cols: &[usize], a: f64, b: &[f64]) -> f64 {
    let mut pred = vec![a; rows.len()];
    for (&j, &bj) in cols.iter().zip(b) {
        if bj != 0.0 {
            for (p, v) in pred.iter_mut().zip(&x.col(j)[rows.clone()]) {
                *p += bj * v;
            }
        }
    }
    let sse: f64 = pred.iter().zip(&y[rows.clone()]).map(|(p, t)| (t - p) * (t - p)).sum();
    (sse / rows.len() as f64).sqrt()
}
