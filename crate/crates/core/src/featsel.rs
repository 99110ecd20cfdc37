//! Feature selection: correlation pruning, LASSO screening and a single
//! forward pass scored on validation RMSE, iterated until the column count
//! stops falling.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::cv::{ordered_mean, CvPlan};
use crate::error::{Error, Result};
use crate::exec::{par_map, par_map_range};
use crate::gram::CrossProducts;
use crate::lasso::{fit_cached, select_lambda_cached, PathConfig};
use crate::linalg::{dot, Matrix};
use crate::linreg::{fit_with_intercept, rmse};

pub const DEFAULT_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedPair {
    pub kept: usize,
    pub removed: usize,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pruned {
    pub kept: Vec<usize>,
    pub removed: Vec<RemovedPair>,
}

fn centred_unit(c: &[f64]) -> Option<Vec<f64>> {
    let n = c.len() as f64;
    let mu = c.iter().sum::<f64>() / n;
    let d: Vec<f64> = c.iter().map(|v| v - mu).collect();
    let norm = dot(&d, &d).sqrt();
    (norm > 0.0).then(|| d.iter().map(|v| v / norm).collect())
}

/// Greedy scan in column order: a column goes when its |Pearson ρ| with an
/// earlier kept column exceeds `threshold`. Constant columns are never
/// correlated with anything.
pub fn prune_correlated(x: &Matrix, threshold: f64) -> Pruned {
    let m = x.cols();
    let unit: Vec<Option<Vec<f64>>> = par_map_range(m, |j| centred_unit(x.col(j)));
    greedy(m, threshold, |i, j| {
        let (ui, uj) = (unit[i].as_ref()?, unit[j].as_ref()?);
        Some(dot(ui, uj))
    })
}

/// [`prune_correlated`] over the fitting range summarised in `cp`.
pub fn prune_cached(cp: &CrossProducts, threshold: f64) -> Pruned {
    let m = cp.n_cols();
    let all: Vec<usize> = (0..m).collect();
    let c = cp.fitting_moments(&all);
    let scale: Vec<Option<f64>> = (0..m)
        .map(|j| {
            let v = c.cxx[j * m + j];
            (v > 1e-24 * c.n as f64 * c.mean_x[j].abs().max(1.0).powi(2)).then(|| v.sqrt())
        })
        .collect();
    greedy(m, threshold, |i, j| Some(c.cxx[i * m + j] / (scale[i]? * scale[j]?)))
}

fn greedy<F>(m: usize, threshold: f64, corr: F) -> Pruned
where
    F: Fn(usize, usize) -> Option<f64> + Sync + Send,
{
    // for each column, the earlier columns it is too close to
    let close: Vec<Vec<(usize, f64)>> = par_map_range(m, |j| {
        (0..j)
            .filter_map(|i| {
                let rho = corr(i, j)?.clamp(-1.0, 1.0);
                (rho.abs() > threshold).then_some((i, rho))
            })
            .collect()
    });
    let mut keep = vec![true; m];
    let mut removed = Vec::new();
    for j in 0..m {
        if let Some(&(i, rho)) = close[j].iter().find(|(i, _)| keep[*i]) {
            keep[j] = false;
            removed.push(RemovedPair {
                kept: i,
                removed: j,
                rho,
            });
        }
    }
    Pruned {
        kept: (0..m).filter(|&j| keep[j]).collect(),
        removed,
    }
}

/// Mean validation RMSE of an intercept-plus-`cols` OLS refitted on every
/// split's training rows. Any split failing (e.g. rank deficiency) fails the
/// whole score.
pub fn cv_score(x: &Matrix, y: &[f64], plan: &CvPlan, cols: &[usize]) -> Result<f64> {
    let sub = x.select_columns(cols);
    let labels: Vec<String> = cols.iter().map(|c| c.to_string()).collect();
    let scores = par_map(&plan.splits, |s| -> Result<f64> {
        let model = fit_with_intercept(&sub.row_range(s.train.clone()), &y[s.train.clone()], &labels)?;
        let val = sub.row_range(s.validation.clone());
        let pred = model.fitted(&val.with_intercept());
        rmse(&y[s.validation.clone()], &pred)
    });
    let scores: Vec<f64> = scores.into_iter().collect::<Result<_>>()?;
    Ok(ordered_mean(&scores))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardStep {
    pub candidate: usize,
    /// Mean validation RMSE with the candidate added; `None` when skipped.
    pub score: Option<f64>,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forward {
    pub selected: Vec<usize>,
    pub score: f64,
    pub steps: Vec<ForwardStep>,
}

/// One pass of forward selection over `candidates` in the given order.
///
/// Without a `base`, the pass starts from the best single candidate (ties go
/// to the earlier one). Each remaining candidate is then kept only if it
/// strictly lowers the mean validation RMSE by more than rounding noise.
pub fn forward_select(
    x: &Matrix,
    y: &[f64],
    plan: &CvPlan,
    candidates: &[usize],
    base: Option<&[usize]>,
) -> Result<Forward> {
    let cp = CrossProducts::new(x, y, plan)?;
    forward_cached(&cp, x, y, candidates, base)
}

fn dependent(c: usize) -> String {
    format!("column {c} is linearly dependent on the columns before it")
}

/// [`forward_select`] on a matrix already summarised in `cp`.
pub fn forward_cached(
    cp: &CrossProducts,
    x: &Matrix,
    y: &[f64],
    candidates: &[usize],
    base: Option<&[usize]>,
) -> Result<Forward> {
    let score = |cols: &[usize]| cp.ols_score(x, y, cols);
    // differences below this are rounding noise, not improvement
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    let resolution = 64.0 * f64::EPSILON * y.iter().map(|v| (v - ybar).abs()).fold(0.0, f64::max);
    let mut steps = Vec::new();
    let (mut selected, mut best) = match base {
        Some(b) if !b.is_empty() => {
            let s = score(b).map_err(|c| Error::Numerical(dependent(c)))?;
            (b.to_vec(), s)
        }
        _ => {
            let singles = par_map(candidates, |&c| score(&[c]));
            let mut best: Option<(usize, f64)> = None;
            for (k, s) in singles.iter().enumerate() {
                if let Ok(s) = s {
                    if best.is_none_or(|(_, b)| *s < b) {
                        best = Some((k, *s));
                    }
                }
            }
            let (k, s) = best.ok_or_else(|| {
                Error::Numerical("no single candidate could be fitted on every split".into())
            })?;
            steps.push(ForwardStep {
                candidate: candidates[k],
                score: Some(s),
                accepted: true,
                note: Some("best single variable".into()),
            });
            (vec![candidates[k]], s)
        }
    };
    for &c in candidates {
        if selected.contains(&c) {
            continue;
        }
        let mut trial = selected.clone();
        trial.push(c);
        match score(&trial) {
            Ok(s) => {
                let accepted = s < best - resolution;
                if accepted {
                    selected = trial;
                    best = s;
                }
                steps.push(ForwardStep {
                    candidate: c,
                    score: Some(s),
                    accepted,
                    note: None,
                });
            }
            Err(d) => {
                debug!("forward selection skips column {c}: {}", dependent(d));
                steps.push(ForwardStep {
                    candidate: c,
                    score: None,
                    accepted: false,
                    note: Some(dependent(d)),
                });
            }
        }
    }
    Ok(Forward {
        selected,
        score: best,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Prune,
    Lasso,
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub iteration: usize,
    pub step: StepKind,
    pub columns_in: usize,
    pub columns_out: usize,
    /// Mean validation RMSE behind the step's decision.
    pub criterion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub removed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub rounds: Vec<Round>,
    pub final_columns: Vec<String>,
    /// Indices of `final_columns` in the input matrix.
    pub final_indices: Vec<usize>,
    pub score: f64,
}

impl SelectionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub threshold: f64,
    pub path: PathConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            path: PathConfig::default(),
        }
    }
}

fn names(labels: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| labels[i].clone()).collect()
}

fn dropped(before: &[usize], after: &[usize]) -> Vec<usize> {
    before.iter().copied().filter(|c| !after.contains(c)).collect()
}

/// Prune once, then alternate LASSO screening and forward selection until the
/// number of columns stops decreasing.
pub fn select_features(
    x: &Matrix,
    labels: &[String],
    y: &[f64],
    plan: &CvPlan,
    cfg: &SelectionConfig,
) -> Result<SelectionReport> {
    if labels.len() != x.cols() {
        return Err(Error::LengthMismatch {
            expected: x.cols(),
            actual: labels.len(),
        });
    }
    if x.cols() == 0 {
        return Err(Error::InvalidArgument("feature selection needs at least one column".into()));
    }
    plan.validate(x.rows())?;
    let empty = |step: &str| {
        Error::Numerical(format!(
            "feature selection left no columns after {step}; loosen the thresholds or lengthen the lambda path"
        ))
    };

    let cp = CrossProducts::new(x, y, plan)?;
    let mut rounds = Vec::new();
    let pruned = prune_cached(&cp, cfg.threshold);
    let all: Vec<usize> = (0..x.cols()).collect();
    rounds.push(Round {
        iteration: 0,
        step: StepKind::Prune,
        columns_in: x.cols(),
        columns_out: pruned.kept.len(),
        criterion: None,
        lambda: None,
        removed: names(labels, &dropped(&all, &pruned.kept)),
    });
    let mut current = pruned.kept;
    let mut score = f64::NAN;
    for iteration in 1..=x.cols() {
        let before = current.len();
        let sel = select_lambda_cached(&cp, x, y, &current, &cfg.path)?;
        let fit = fit_cached(&cp, &current, sel.lambda, &cfg.path)?;
        let screened: Vec<usize> = fit.active_set.iter().map(|&k| current[k]).collect();
        rounds.push(Round {
            iteration,
            step: StepKind::Lasso,
            columns_in: before,
            columns_out: screened.len(),
            criterion: sel.mean_rmse[sel.chosen],
            lambda: Some(sel.lambda),
            removed: names(labels, &dropped(&current, &screened)),
        });
        if screened.is_empty() {
            return Err(empty("LASSO"));
        }
        let fwd = forward_cached(&cp, x, y, &screened, None)?;
        if fwd.selected.is_empty() {
            return Err(empty("forward selection"));
        }
        rounds.push(Round {
            iteration,
            step: StepKind::Forward,
            columns_in: screened.len(),
            columns_out: fwd.selected.len(),
            criterion: Some(fwd.score),
            lambda: None,
            removed: names(labels, &dropped(&screened, &fwd.selected)),
        });
        info!(
            "selection round {iteration}: {before} -> {} -> {} columns",
            screened.len(),
            fwd.selected.len()
        );
        // keep input order so later rounds scan candidates deterministically
        let mut next = fwd.selected;
        next.sort_unstable();
        current = next;
        score = fwd.score;
        if current.len() >= before {
            break;
        }
    }
    Ok(SelectionReport {
        rounds,
        final_columns: names(labels, &current),
        final_indices: current,
        score,
    })
}
