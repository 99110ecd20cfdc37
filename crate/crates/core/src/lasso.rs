//! L1-penalised least squares by cyclic coordinate descent.
//!
//! The objective is `‖y − Xβ‖² + λ‖β‖₁` without the usual `1/2n` scaling, so
//! the soft-threshold constant is `λ/2` and `λ_max = 2·max|Xᵀy|`.

use std::ops::Range;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::cv::{ordered_mean, CvPlan};
use crate::error::{Error, Result};
use crate::exec::par_map_range;
use crate::gram::{validation_rmse, Centered, CrossProducts};
use crate::linalg::{dot, Matrix};
use crate::timeseries::{format_value, write_atomic};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 10_000;

const MEAN_TOL: f64 = 1e-8;
const VAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub active_set: Vec<usize>,
    pub n_iter: usize,
    pub converged: bool,
    /// Objective after each sweep, starting with the initial point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_history: Vec<f64>,
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Column means and population standard deviations learned on a row range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &Matrix, rows: Range<usize>) -> Self {
        let n = rows.len() as f64;
        let (mut mean, mut sd) = (Vec::new(), Vec::new());
        for j in 0..x.cols() {
            let c = &x.col(j)[rows.clone()];
            let mu = c.iter().sum::<f64>() / n;
            let var = c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            mean.push(mu);
            sd.push(var.sqrt());
        }
        Self { mean, sd }
    }

    /// Standardised copy of `x`. Constant columns map to zero.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for j in 0..x.cols() {
            let (mu, s) = (self.mean[j], self.sd[j]);
            for v in out.col_mut(j) {
                *v = if s > 0.0 { (*v - mu) / s } else { 0.0 };
            }
        }
        out
    }
}

/// Errors unless every column has mean 0 and population variance 1.
pub fn check_standardized(x: &Matrix) -> Result<()> {
    let n = x.rows() as f64;
    for j in 0..x.cols() {
        let c = x.col(j);
        let mu = c.iter().sum::<f64>() / n;
        let var = c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
        if mu.abs() > MEAN_TOL || (var - 1.0).abs() > VAR_TOL {
            return Err(Error::InvalidArgument(format!(
                "column {j} is not standardised (mean {mu:e}, variance {var})"
            )));
        }
    }
    Ok(())
}

/// Standardised columns of `x` restricted to `rows`, evaluated on the fly so
/// cross-validation never copies the matrix.
struct View<'a> {
    x: &'a Matrix,
    rows: Range<usize>,
    mean: Vec<f64>,
    inv_sd: Vec<f64>,
    /// `Σ x̃²` per column; zero marks an unusable (constant) column.
    norm2: Vec<f64>,
}

impl<'a> View<'a> {
    fn new(x: &'a Matrix, rows: Range<usize>, stats: &Standardization) -> Self {
        let mut norm2 = Vec::with_capacity(x.cols());
        let inv_sd: Vec<f64> = stats
            .sd
            .iter()
            .map(|&s| if s > 1e-12 { 1.0 / s } else { 0.0 })
            .collect();
        for j in 0..x.cols() {
            let c = &x.col(j)[rows.clone()];
            let (mu, is) = (stats.mean[j], inv_sd[j]);
            norm2.push(c.iter().map(|v| ((v - mu) * is).powi(2)).sum());
        }
        Self {
            x,
            rows,
            mean: stats.mean.clone(),
            inv_sd,
            norm2,
        }
    }

    fn identity(x: &'a Matrix) -> Self {
        let m = x.cols();
        let stats = Standardization {
            mean: vec![0.0; m],
            sd: vec![1.0; m],
        };
        Self::new(x, 0..x.rows(), &stats)
    }

    fn n(&self) -> usize {
        self.rows.len()
    }

    fn m(&self) -> usize {
        self.x.cols()
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.x.col(j)[self.rows.clone()]
    }

    /// `x̃_jᵀ r` given `Σ r`.
    fn dot(&self, j: usize, r: &[f64], r_sum: f64) -> f64 {
        (dot(self.col(j), r) - self.mean[j] * r_sum) * self.inv_sd[j]
    }

    fn sub_scaled(&self, j: usize, delta: f64, r: &mut [f64]) {
        let (mu, s) = (self.mean[j], delta * self.inv_sd[j]);
        for (ri, v) in r.iter_mut().zip(self.col(j)) {
            *ri -= s * (v - mu);
        }
    }

    /// `Xβ` on the view's rows.
    fn mul(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                self.sub_scaled(j, -b, &mut out);
            }
        }
        out
    }

    fn lambda_max(&self, y: &[f64]) -> f64 {
        let s: f64 = y.iter().sum();
        (0..self.m())
            .filter(|&j| self.norm2[j] > 0.0)
            .map(|j| 2.0 * self.dot(j, y, s).abs())
            .fold(0.0, f64::max)
    }
}

fn objective(r: &[f64], beta: &[f64], lambda: f64) -> f64 {
    dot(r, r) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

fn active(beta: &[f64]) -> Vec<usize> {
    (0..beta.len()).filter(|&j| beta[j] != 0.0).collect()
}

fn descend(
    view: &View,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&[f64]>,
) -> LassoFit {
    let m = view.m();
    let mut beta = warm.map_or_else(|| vec![0.0; m], <[f64]>::to_vec);
    let fitted = view.mul(&beta);
    let mut r: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let mut history = vec![objective(&r, &beta, lambda)];
    let half = lambda / 2.0;

    let sweep = |idx: &[usize], beta: &mut [f64], r: &mut [f64]| -> f64 {
        // columns are centred on the view's rows, so updates leave Σr unchanged
        let r_sum: f64 = r.iter().sum();
        let mut max_delta: f64 = 0.0;
        for &j in idx {
            let nj = view.norm2[j];
            if nj == 0.0 {
                continue;
            }
            let old = beta[j];
            let z = view.dot(j, r, r_sum) + nj * old;
            let new = soft_threshold(z, half) / nj;
            let delta = new - old;
            if delta != 0.0 {
                view.sub_scaled(j, delta, r);
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        max_delta
    };

    let all: Vec<usize> = (0..m).collect();
    let mut n_iter = 0;
    let mut converged = false;
    'outer: while n_iter < max_iter {
        let d = sweep(&all, &mut beta, &mut r);
        n_iter += 1;
        history.push(objective(&r, &beta, lambda));
        if d < tol {
            converged = true;
            break;
        }
        let act = active(&beta);
        loop {
            if n_iter >= max_iter {
                break 'outer;
            }
            let d = sweep(&act, &mut beta, &mut r);
            n_iter += 1;
            history.push(objective(&r, &beta, lambda));
            if d < tol {
                break;
            }
        }
    }
    LassoFit {
        lambda,
        active_set: active(&beta),
        beta,
        n_iter,
        converged,
        objective_history: history,
    }
}

fn check_args(lambda: f64, tol: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be ≥ 0, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    Ok(())
}

/// LASSO on a standardised design and centred response.
///
/// Hitting `max_iter` is not an error: the fit comes back with
/// `converged = false`.
pub fn fit_lasso(x: &Matrix, y: &[f64], lambda: f64, tol: f64, max_iter: usize) -> Result<LassoFit> {
    fit_lasso_warm(x, y, lambda, tol, max_iter, None)
}

pub fn fit_lasso_warm(
    x: &Matrix,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&[f64]>,
) -> Result<LassoFit> {
    check_args(lambda, tol)?;
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    check_standardized(x)?;
    Ok(descend(&View::identity(x), y, lambda, tol, max_iter, warm))
}

/// `2·max|Xᵀy|`, the smallest penalty giving an all-zero solution.
pub fn lambda_max(x: &Matrix, y: &[f64]) -> f64 {
    View::identity(x).lambda_max(y)
}

fn geometric(lmax: f64, n: usize, ratio: f64) -> Vec<f64> {
    (0..n)
        .map(|k| lmax * ratio.powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Descending geometric grid from `λ_max` to `λ_max·ratio`.
pub fn lambda_path(x: &Matrix, y: &[f64], n_lambdas: usize, ratio: f64) -> Result<Vec<f64>> {
    check_path_args(n_lambdas, ratio)?;
    Ok(geometric(lambda_max(x, y), n_lambdas, ratio))
}

fn check_path_args(n_lambdas: usize, ratio: f64) -> Result<()> {
    if n_lambdas < 2 || !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda path needs n ≥ 2 and 0 < ratio < 1 (got n={n_lambdas}, ratio={ratio})"
        )));
    }
    Ok(())
}

/// Warm-started fits along a descending path.
pub fn fit_path(x: &Matrix, y: &[f64], lambdas: &[f64], tol: f64, max_iter: usize) -> Result<Vec<LassoFit>> {
    check_standardized(x)?;
    let view = View::identity(x);
    Ok(path_on(&view, y, lambdas, tol, max_iter))
}

fn path_on(view: &View, y: &[f64], lambdas: &[f64], tol: f64, max_iter: usize) -> Vec<LassoFit> {
    let mut out: Vec<LassoFit> = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let warm = out.last().map(|f| f.beta.clone());
        out.push(descend(view, y, l, tol, max_iter, warm.as_deref()));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub n_lambdas: usize,
    pub ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            n_lambdas: 20,
            ratio: 1e-3,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Outcome of choosing `λ` by cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSelection {
    pub lambdas: Vec<f64>,
    /// Mean validation RMSE per `λ`; `None` where the `λ` was skipped.
    pub mean_rmse: Vec<Option<f64>>,
    /// Active-set size per `λ` on the largest training window.
    pub active_size: Vec<usize>,
    pub chosen: usize,
    pub lambda: f64,
}

impl LambdaSelection {
    /// Path diagnostics as `lambda,active,mean_validation_rmse`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,active,mean_validation_rmse\n");
        for k in 0..self.lambdas.len() {
            let rmse = self.mean_rmse[k].map(format_value).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{}\n",
                format_value(self.lambdas[k]),
                self.active_size[k],
                rmse
            ));
        }
        s
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Standardised LASSO in cross-product form: `S = X̃ᵀX̃`, `c = X̃ᵀỹ`.
struct GramProblem {
    k: usize,
    s: Vec<f64>,
    c: Vec<f64>,
    sd: Vec<f64>,
    mean_x: Vec<f64>,
    mean_y: f64,
    usable: Vec<bool>,
}

impl GramProblem {
    fn new(m: &Centered) -> Self {
        let k = m.k();
        let n = m.n as f64;
        let sd: Vec<f64> = (0..k).map(|j| (m.cxx[j * k + j].max(0.0) / n).sqrt()).collect();
        let usable: Vec<bool> = (0..k)
            .map(|j| sd[j] > 1e-12 * m.mean_x[j].abs().max(1.0))
            .collect();
        let mut s = vec![0.0; k * k];
        let mut c = vec![0.0; k];
        for i in (0..k).filter(|&i| usable[i]) {
            c[i] = m.cxy[i] / sd[i];
            for j in (0..k).filter(|&j| usable[j]) {
                s[i * k + j] = m.cxx[i * k + j] / (sd[i] * sd[j]);
            }
        }
        Self {
            k,
            s,
            c,
            sd,
            mean_x: m.mean_x.clone(),
            mean_y: m.mean_y,
            usable,
        }
    }

    fn lambda_max(&self) -> f64 {
        (0..self.k)
            .filter(|&j| self.usable[j])
            .map(|j| 2.0 * self.c[j].abs())
            .fold(0.0, f64::max)
    }

    /// Intercept and slopes on the original scale.
    fn unscale(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        let b: Vec<f64> = (0..self.k)
            .map(|j| if beta[j] != 0.0 { beta[j] / self.sd[j] } else { 0.0 })
            .collect();
        (self.mean_y - dot(&b, &self.mean_x), b)
    }

    fn descend(&self, lambda: f64, tol: f64, max_iter: usize, warm: Option<&[f64]>) -> LassoFit {
        let k = self.k;
        let mut beta = warm.map_or_else(|| vec![0.0; k], <[f64]>::to_vec);
        let half = lambda / 2.0;
        let mut g = vec![0.0; k];
        let gradient = |beta: &[f64], g: &mut [f64]| {
            g.copy_from_slice(&self.c);
            for (j, &b) in beta.iter().enumerate() {
                if b != 0.0 {
                    for (gi, sij) in g.iter_mut().zip(&self.s[j * k..(j + 1) * k]) {
                        *gi -= sij * b;
                    }
                }
            }
        };
        let sweep = |idx: &[usize], beta: &mut [f64], g: &mut [f64]| -> f64 {
            let mut max_delta: f64 = 0.0;
            for &j in idx {
                if !self.usable[j] {
                    continue;
                }
                let nj = self.s[j * k + j];
                let old = beta[j];
                let new = soft_threshold(g[j] + nj * old, half) / nj;
                let delta = new - old;
                if delta != 0.0 {
                    for (gi, sij) in g.iter_mut().zip(&self.s[j * k..(j + 1) * k]) {
                        *gi -= sij * delta;
                    }
                    beta[j] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            max_delta
        };
        let all: Vec<usize> = (0..k).collect();
        let mut n_iter = 0;
        let mut converged = false;
        'outer: while n_iter < max_iter {
            // refresh to stop drift from accumulated updates
            gradient(&beta, &mut g);
            let d = sweep(&all, &mut beta, &mut g);
            n_iter += 1;
            if d < tol {
                converged = true;
                break;
            }
            let act = active(&beta);
            loop {
                if n_iter >= max_iter {
                    break 'outer;
                }
                let d = sweep(&act, &mut beta, &mut g);
                n_iter += 1;
                if d < tol {
                    break;
                }
            }
        }
        LassoFit {
            lambda,
            active_set: active(&beta),
            beta,
            n_iter,
            converged,
            objective_history: Vec::new(),
        }
    }

    fn path(&self, lambdas: &[f64], tol: f64, max_iter: usize) -> Vec<LassoFit> {
        let mut out: Vec<LassoFit> = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            let warm = out.last().map(|f| f.beta.clone());
            out.push(self.descend(l, tol, max_iter, warm.as_deref()));
        }
        out
    }
}

struct SplitPath {
    active: Vec<usize>,
    rmse: Vec<f64>,
    n_train: usize,
}

/// Picks `λ` minimising mean validation RMSE over the plan's splits.
///
/// `x` and `y` are raw; each split standardises with its own training rows.
/// The grid runs from the `λ_max` of the largest training window. A `λ` is
/// skipped when some split has no more training rows than active features.
/// Ties go to the larger `λ`.
pub fn select_lambda(x: &Matrix, y: &[f64], plan: &CvPlan, cfg: &PathConfig) -> Result<LambdaSelection> {
    check_path_args(cfg.n_lambdas, cfg.ratio)?;
    check_args(0.0, cfg.tol)?;
    let cp = CrossProducts::new(x, y, plan)?;
    let all: Vec<usize> = (0..x.cols()).collect();
    select_lambda_cached(&cp, x, y, &all, cfg)
}

/// [`select_lambda`] on the columns `cols` of a matrix already summarised
/// in `cp`. Indices in the result refer to positions within `cols`.
pub fn select_lambda_cached(
    cp: &CrossProducts,
    x: &Matrix,
    y: &[f64],
    cols: &[usize],
    cfg: &PathConfig,
) -> Result<LambdaSelection> {
    check_path_args(cfg.n_lambdas, cfg.ratio)?;
    check_args(0.0, cfg.tol)?;
    let plan = cp.plan();
    let last = plan.len() - 1;
    let lmax = GramProblem::new(&cp.train_moments(last, cols)).lambda_max();
    if lmax == 0.0 {
        return Err(Error::Numerical(
            "response is uncorrelated with every feature; LASSO path is empty".into(),
        ));
    }
    let lambdas = geometric(lmax, cfg.n_lambdas, cfg.ratio);

    let per_split = par_map_range(plan.len(), |k| {
        let prob = GramProblem::new(&cp.train_moments(k, cols));
        let fits = prob.path(&lambdas, cfg.tol, cfg.max_iter);
        let val = plan.splits[k].validation.clone();
        let rmse = fits
            .iter()
            .map(|f| {
                let (a, b) = prob.unscale(&f.beta);
                validation_rmse(x, y, val.clone(), cols, a, &b)
            })
            .collect();
        SplitPath {
            active: fits.iter().map(|f| f.active_set.len()).collect(),
            rmse,
            n_train: plan.splits[k].train.len(),
        }
    });

    let mut mean_rmse = Vec::with_capacity(lambdas.len());
    for k in 0..lambdas.len() {
        let crowded = per_split.iter().any(|p| p.n_train <= p.active[k]);
        if crowded {
            warn!("lambda {} skipped: a split has no more rows than active features", lambdas[k]);
            mean_rmse.push(None);
        } else {
            let v: Vec<f64> = per_split.iter().map(|p| p.rmse[k]).collect();
            mean_rmse.push(Some(ordered_mean(&v)));
        }
    }
    let chosen = pick_lambda(&mean_rmse).ok_or_else(|| {
        Error::Numerical("every lambda was skipped: training windows too short".into())
    })?;
    let active_size = per_split.last().map(|p| p.active.clone()).unwrap_or_default();
    Ok(LambdaSelection {
        lambda: lambdas[chosen],
        lambdas,
        mean_rmse,
        active_size,
        chosen,
    })
}

/// Fits `cols` at a single `λ` over the plan's fitting range, standardising
/// on those rows. Indices refer to positions within `cols`.
pub fn fit_cached(cp: &CrossProducts, cols: &[usize], lambda: f64, cfg: &PathConfig) -> Result<LassoFit> {
    check_args(lambda, cfg.tol)?;
    let prob = GramProblem::new(&cp.fitting_moments(cols));
    Ok(prob.path(&warm_grid(prob.lambda_max(), lambda), cfg.tol, cfg.max_iter).pop().unwrap())
}

/// A short descending path ending at `lambda`, for warm starts.
fn warm_grid(lmax: f64, lambda: f64) -> Vec<f64> {
    let lmax = lmax.max(lambda);
    let mut grid: Vec<f64> = geometric(lmax, 8, (lambda / lmax).max(1e-12))
        .into_iter()
        .filter(|&l| l > lambda)
        .collect();
    grid.push(lambda);
    grid
}

/// Index of the smallest score on a descending grid; the first (largest `λ`)
/// wins ties.
pub fn pick_lambda(scores: &[Option<f64>]) -> Option<usize> {
    let mut chosen: Option<usize> = None;
    for (k, r) in scores.iter().enumerate() {
        if let Some(r) = r {
            if chosen.is_none_or(|c| *r < scores[c].unwrap()) {
                chosen = Some(k);
            }
        }
    }
    chosen
}

/// Fits at a single `λ` on raw `x`, standardising on `rows`. Returns the fit
/// on the standardised scale.
pub fn fit_on_rows(x: &Matrix, y: &[f64], rows: Range<usize>, lambda: f64, cfg: &PathConfig) -> Result<LassoFit> {
    check_args(lambda, cfg.tol)?;
    let stats = Standardization::fit(x, rows.clone());
    let view = View::new(x, rows.clone(), &stats);
    let ybar = y[rows.clone()].iter().sum::<f64>() / rows.len() as f64;
    let yc: Vec<f64> = y[rows].iter().map(|v| v - ybar).collect();
    let grid = warm_grid(view.lambda_max(&yc), lambda);
    Ok(path_on(&view, &yc, &grid, cfg.tol, cfg.max_iter).pop().unwrap())
}

/// Largest normalised KKT violation, `|−2x̃ᵀr + λ·∂|β|| / 2n`.
pub fn kkt_violation(x: &Matrix, y: &[f64], fit: &LassoFit) -> f64 {
    let n = x.rows() as f64;
    let fitted = x.mul_vec(&fit.beta);
    let r: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let mut worst: f64 = 0.0;
    for j in 0..x.cols() {
        let g = -2.0 * dot(x.col(j), &r);
        let v = if fit.beta[j] != 0.0 {
            (g + fit.lambda * fit.beta[j].signum()).abs()
        } else {
            (g.abs() - fit.lambda).max(0.0)
        };
        worst = worst.max(v / (2.0 * n));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal() -> Matrix {
        Matrix::from_columns(&[vec![1.0, 1.0, -1.0, -1.0], vec![1.0, -1.0, 1.0, -1.0]])
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    #[test]
    fn huge_lambda_gives_zero() {
        let x = orthonormal();
        let y = [3.0, 1.0, -0.5, -3.5];
        let lm = lambda_max(&x, &y);
        let f = fit_lasso(&x, &y, lm, DEFAULT_TOL, 100).unwrap();
        assert!(f.beta.iter().all(|&b| b == 0.0));
        assert!(f.active_set.is_empty() && f.converged);
    }

    #[test]
    fn single_feature_lambda_zero_is_ols() {
        let x = Matrix::from_columns(&[vec![-1.5, -0.5, 0.5, 1.5]]);
        let st = Standardization::fit(&x, 0..4);
        let xs = st.apply(&x);
        let y = [-2.0, -1.5, 0.5, 3.0];
        let f = fit_lasso(&xs, &y, 0.0, 1e-12, 1000).unwrap();
        let c = xs.col(0);
        let slope = dot(c, &y) / dot(c, c);
        assert!((f.beta[0] - slope).abs() < 1e-10);
    }

    #[test]
    fn rejects_unstandardised() {
        let x = Matrix::from_columns(&[vec![1.0, 2.0, 3.0]]);
        assert!(fit_lasso(&x, &[0.0, 0.0, 0.0], 1.0, 1e-7, 10).is_err());
        assert!(fit_lasso(&orthonormal(), &[0.0; 4], -1.0, 1e-7, 10).is_err());
    }

    #[test]
    fn max_iter_returns_unconverged() {
        let x = Matrix::from_columns(&[
            vec![1.0, 1.0, -1.0, -1.0],
            vec![1.0, 0.8, -0.8, -1.0],
        ]);
        let st = Standardization::fit(&x, 0..4);
        let f = fit_lasso(&st.apply(&x), &[1.0, 0.5, -0.2, -1.3], 0.0, 1e-15, 1).unwrap();
        assert!(!f.converged);
        assert_eq!(f.n_iter, 1);
    }

    #[test]
    fn path_is_geometric() {
        let x = orthonormal();
        let y = [3.0, 1.0, -0.5, -3.5];
        let p = lambda_path(&x, &y, 3, 0.01).unwrap();
        let lm = lambda_max(&x, &y);
        assert_eq!(p[0], lm);
        assert!((p[1] - lm * 0.1).abs() < 1e-12 * lm);
        assert!((p[2] - lm * 0.01).abs() < 1e-12 * lm);
        assert!(lambda_path(&x, &y, 1, 0.5).is_err());
        let fits = fit_path(&x, &y, &p, DEFAULT_TOL, 1000).unwrap();
        assert!(fits[0].active_set.is_empty());
    }

    #[test]
    fn ties_go_to_larger_lambda() {
        assert_eq!(pick_lambda(&[Some(2.0), Some(1.0), Some(1.0)]), Some(1));
        assert_eq!(pick_lambda(&[None, Some(3.0), Some(3.0)]), Some(1));
        assert_eq!(pick_lambda(&[None, None]), None);
    }

    #[test]
    fn diagnostics_csv_has_header() {
        let s = LambdaSelection {
            lambdas: vec![2.0, 1.0],
            mean_rmse: vec![Some(0.5), None],
            active_size: vec![0, 3],
            chosen: 0,
            lambda: 2.0,
        };
        assert_eq!(s.to_csv(), "lambda,active,mean_validation_rmse\n2,0,0.5\n1,3,\n");
    }
}
