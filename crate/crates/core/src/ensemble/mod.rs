//! Softmax-weighted ensembles of base models, residual correction, and the
//! per-horizon routing of the compound forecaster.
//!
//! Member weights are `softmax(−rmse)` over mean validation RMSE, so the
//! better member always gets the larger weight. Ensemble intervals are the
//! weighted average of member bounds.

mod compound;
mod member;
mod plan;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::design::ModelVariant;
use crate::cv::{ordered_mean, Evaluation, SplitScore};
use crate::error::{Error, Result};
use crate::timeseries::TimeFrame;

pub use compound::{
    build_compound, score_routes, CompoundForecaster, Corrector, CorrectorChoice, EnsembleConfig,
    ForecastRow, HorizonEvaluation, HorizonScore, MemberSummary, SelectionRecord, Trained,
    TrainingReport,
};
pub use member::{
    build_base_model, design_plan, rank_pool, BaseModel, MemberFit, MemberPrediction, RecipeConfig,
    SplitPredictions,
};
pub use plan::{HorizonPlan, ResponseKind, Route, DEFAULT_SOURCE, HORIZONS};

/// `w_i = exp(−rmse_i) / Σ exp(−rmse_j)`, computed with a max-shift.
pub fn softmax_weights(rmse: &[f64]) -> Result<Vec<f64>> {
    if rmse.is_empty() {
        return Err(Error::InvalidArgument("softmax weights need at least one member".into()));
    }
    if let Some(r) = rmse.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "member RMSE must be finite and non-negative, got {r}"
        )));
    }
    let best = rmse.iter().copied().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = rmse.iter().map(|r| (best - r).exp()).collect();
    let total: f64 = e.iter().sum();
    Ok(e.iter().map(|v| v / total).collect())
}

/// Point forecast with an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    /// Weighted sum of member estimation standard deviations.
    pub estimation_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEnsemble {
    pub horizon: usize,
    pub members: Vec<BaseModel>,
    pub weights: Vec<f64>,
    /// Mean validation RMSE of each member.
    pub source_rmse: Vec<f64>,
}

impl WeightedEnsemble {
    /// Weights members by their mean validation RMSE. Every member must share
    /// the horizon and the cross-validation plan.
    pub fn new(members: Vec<BaseModel>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("an ensemble needs at least one member".into()))?;
        for m in &members[1..] {
            if m.horizon != first.horizon || m.cv_plan != first.cv_plan {
                return Err(Error::InvalidArgument(format!(
                    "{} and {} were evaluated on different horizons or splits",
                    first.variant, m.variant
                )));
            }
        }
        let source_rmse: Vec<f64> = members.iter().map(BaseModel::validation_rmse).collect();
        let weights = softmax_weights(&source_rmse)?;
        Ok(Self {
            horizon: first.horizon,
            members,
            weights,
            source_rmse,
        })
    }

    pub fn variants(&self) -> Vec<ModelVariant> {
        self.members.iter().map(|m| m.variant).collect()
    }

    /// Ensemble forecasts at `origins`; `None` where any member lacks inputs.
    pub fn predict(&self, frame: &TimeFrame, origins: &[usize], level: f64) -> Result<Vec<Option<Prediction>>> {
        let per_member = self
            .members
            .iter()
            .map(|m| m.predict(frame, origins, level))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..origins.len())
            .map(|r| {
                let mut p = Prediction {
                    point: 0.0,
                    lo: 0.0,
                    hi: 0.0,
                    estimation_sd: 0.0,
                };
                for (w, preds) in self.weights.iter().zip(&per_member) {
                    let m = preds[r]?;
                    p.point += w * m.point;
                    p.lo += w * m.lo;
                    p.hi += w * m.hi;
                    p.estimation_sd += w * m.estimation_variance.sqrt();
                }
                Some(p)
            })
            .collect())
    }

    /// Cross-validated scores of the weighted combination of the members'
    /// per-split refits, on the origins every member could score.
    pub fn evaluate(&self, predictions: &[Vec<SplitPredictions>], response: &[f64]) -> Result<Evaluation> {
        if predictions.len() != self.members.len() {
            return Err(Error::LengthMismatch {
                expected: self.members.len(),
                actual: predictions.len(),
            });
        }
        let n_splits = self.members[0].cv_plan.len();
        let h = self.horizon;
        let combine = |k: usize, pick: fn(&SplitPredictions) -> &Vec<(usize, f64)>| -> Option<f64> {
            let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
            for (w, p) in self.weights.iter().zip(predictions) {
                for &(t, v) in pick(&p[k]) {
                    let e = acc.entry(t).or_insert((0.0, 0));
                    e.0 += w * v;
                    e.1 += 1;
                }
            }
            let mut sse = 0.0;
            let mut n = 0usize;
            for (t, (v, count)) in acc {
                let y = response.get(t + h).copied().unwrap_or(f64::NAN);
                if count == self.members.len() && y.is_finite() {
                    sse += (y - v) * (y - v);
                    n += 1;
                }
            }
            (n > 0).then(|| (sse / n as f64).sqrt())
        };
        let per_split: Vec<SplitScore> = (0..n_splits)
            .map(|k| {
                let validation = combine(k, |p| &p.validation);
                SplitScore {
                    validation,
                    test: combine(k, |p| &p.test),
                    error: validation.is_none().then(|| "no origin scored by every member".to_string()),
                }
            })
            .collect();
        let vals: Vec<f64> = per_split.iter().filter_map(|s| s.validation).collect();
        let tests: Vec<f64> = per_split.iter().filter_map(|s| s.test).collect();
        if vals.is_empty() {
            return Err(Error::Numerical(format!("horizon {h}: members share no validation origin")));
        }
        Ok(Evaluation {
            complete: per_split.iter().all(|s| s.error.is_none()),
            per_split,
            mean_validation: ordered_mean(&vals),
            mean_test: (!tests.is_empty()).then(|| ordered_mean(&tests)),
        })
    }
}
