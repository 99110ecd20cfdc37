use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::basis::design::{build_design, Design, Feature, FourierSpec, ModelVariant, Recipe};
use crate::cv::{evaluate, CvPlan, Evaluation, Split};
use crate::error::{Error, Result};
use crate::featsel::{select_features, SelectionConfig, SelectionReport};
use crate::gram::CrossProducts;
use crate::lasso::{fit_cached, select_lambda_cached};
use crate::linalg::Matrix;
use crate::linreg::{fit_with_intercept, rmse, with_one, LinearModel};
use crate::timeseries::TimeFrame;

/// Recipe settings shared by every horizon. Column lists default to every
/// non-response column of the frame in its natural role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecipeConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forecast_columns: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realtime_columns: Option<Vec<String>>,
    pub ma_windows: Vec<usize>,
    pub fourier: Vec<FourierSpec>,
    pub bspline_interior: usize,
    pub ns_count: usize,
    pub pool_size: usize,
    pub tau_interactions: bool,
}

impl Default for RecipeConfig {
    fn default() -> Self {
        let r = Recipe::new(ModelVariant::M0, "");
        Self {
            forecast_columns: None,
            realtime_columns: None,
            ma_windows: r.ma_windows,
            fourier: r.fourier,
            bspline_interior: r.bspline_interior,
            ns_count: r.ns_count,
            pool_size: r.pool_size,
            tau_interactions: r.tau_interactions,
        }
    }
}

impl RecipeConfig {
    /// Recipe for `variant` at horizon `h`, without forecast columns that are
    /// unavailable at `h`.
    pub fn recipe(&self, variant: ModelVariant, frame: &TimeFrame, response: &str, h: usize) -> Recipe {
        let mut r = Recipe::from_frame(variant, frame, response);
        if let Some(c) = &self.forecast_columns {
            r.forecast_columns = c.clone();
        }
        if let Some(c) = &self.realtime_columns {
            r.realtime_columns = c.clone();
        }
        r.ma_windows = self.ma_windows.clone();
        r.fourier = self.fourier.clone();
        r.bspline_interior = self.bspline_interior;
        r.ns_count = self.ns_count;
        r.pool_size = self.pool_size;
        r.tau_interactions = self.tau_interactions;
        r.restricted_to(frame, h)
    }
}

/// Maps a plan over frame rows onto the rows of a design with the given
/// (sorted) origins. A training row's target hour lies before the end of its
/// window, so training responses never reach into the validation block.
pub fn design_plan(origins: &[usize], horizon: usize, plan: &CvPlan) -> Result<CvPlan> {
    let row = |t: usize| origins.partition_point(|&o| o < t);
    let mut splits: Vec<Split> = Vec::with_capacity(plan.len());
    for (k, s) in plan.splits.iter().enumerate() {
        let validation = row(s.validation.start)..row(s.validation.end);
        let mut train_end = row(s.train.end.saturating_sub(horizon));
        if let Some(prev) = splits.last() {
            train_end = train_end.max(prev.validation.end);
        }
        let split = Split {
            train: 0..train_end,
            validation,
            test: row(s.test.start)..row(s.test.end),
        };
        if split.train.len() < 2 || split.validation.is_empty() {
            return Err(Error::Data(format!(
                "horizon {horizon}: split {} has too few complete rows ({} training, {} validation)",
                k + 1,
                split.train.len(),
                split.validation.len()
            )));
        }
        splits.push(split);
    }
    let out = CvPlan { splits };
    out.validate(origins.len())?;
    Ok(out)
}

/// Predictions of a split's refitted model, keyed by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPredictions {
    pub validation: Vec<(usize, f64)>,
    pub test: Vec<(usize, f64)>,
}

/// A fitted base model for one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModel {
    pub variant: ModelVariant,
    pub horizon: usize,
    /// Selected columns only.
    pub design: Design,
    pub model: LinearModel,
    /// Per-split refits of the selected columns.
    pub evaluation: Evaluation,
    /// Frame-row plan the evaluation used.
    pub cv_plan: CvPlan,
}

/// One member prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberPrediction {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub estimation_variance: f64,
}

impl BaseModel {
    pub fn validation_rmse(&self) -> f64 {
        self.evaluation.mean_validation
    }

    /// Predictions at `origins`; `None` where an input is missing.
    pub fn predict(&self, frame: &TimeFrame, origins: &[usize], level: f64) -> Result<Vec<Option<MemberPrediction>>> {
        let x = self.design.evaluate(frame, origins)?;
        (0..origins.len())
            .map(|r| {
                let row = x.row(r);
                if row.iter().any(|v| !v.is_finite()) {
                    return Ok(None);
                }
                let z = with_one(&row);
                let (lo, hi) = self.model.prediction_interval(&z, level)?;
                Ok(Some(MemberPrediction {
                    point: self.model.predict(&z)?,
                    lo,
                    hi,
                    estimation_variance: self.model.estimation_variance(&z)?,
                }))
            })
            .collect()
    }
}

/// Output of [`build_base_model`].
#[derive(Debug, Clone)]
pub struct MemberFit {
    pub model: BaseModel,
    pub selection: SelectionReport,
    pub predictions: Vec<SplitPredictions>,
}

fn fitting_origins(plan: &CvPlan) -> Vec<usize> {
    plan.fitting_range().collect()
}

/// OLS with intercept, dropping dependent columns until the fit succeeds.
fn fit_dropping(x: &Matrix, y: &[f64], labels: &mut Vec<String>, cols: &mut Vec<usize>) -> Result<LinearModel> {
    loop {
        let sub = x.select_columns(cols);
        match fit_with_intercept(&sub, y, labels) {
            Err(Error::RankDeficient { column }) => {
                let Some(k) = labels.iter().position(|l| *l == column) else {
                    return Err(Error::RankDeficient { column });
                };
                debug!("dropping dependent column `{column}` from the final fit");
                labels.remove(k);
                cols.remove(k);
                if cols.is_empty() {
                    return Err(Error::Numerical("every selected column was linearly dependent".into()));
                }
            }
            other => return other,
        }
    }
}

/// Design build, feature selection and OLS for one variant and horizon.
///
/// `plan` is over frame rows. Spline knots and other data-dependent
/// parameters come from the plan's fitting range; the final OLS is fitted on
/// the same rows.
pub fn build_base_model(
    frame: &TimeFrame,
    horizon: usize,
    recipe: &Recipe,
    plan: &CvPlan,
    cfg: &SelectionConfig,
) -> Result<MemberFit> {
    let fit_origins = fitting_origins(plan);
    let dfit = build_design(frame, horizon, recipe, Some(&fit_origins))?;
    let dplan = design_plan(&dfit.origins, horizon, plan)?;
    let x = &dfit.matrix.matrix;
    let y = &dfit.response;
    let labels = dfit.matrix.labels();
    let selection = select_features(x, &labels, y, &dplan, cfg)?;

    let mut cols = selection.final_indices.clone();
    let mut names: Vec<String> = cols.iter().map(|&c| labels[c].clone()).collect();
    let fit_rows = dplan.fitting_range();
    let fx = x.row_range(fit_rows.clone());
    let model = fit_dropping(&fx, &y[fit_rows], &mut names, &mut cols)?;
    let design = dfit.design.select(&cols);
    let sub = x.select_columns(&cols);

    let fit = |r: std::ops::Range<usize>| fit_with_intercept(&sub.row_range(r.clone()), &y[r], &names);
    let predict = |m: &LinearModel, r: std::ops::Range<usize>| Ok(m.fitted(&sub.row_range(r).with_intercept()));
    let evaluation = evaluate(&dplan, y, fit, predict, rmse)?;
    let predictions = dplan
        .splits
        .iter()
        .map(|s| {
            let keyed = |m: &LinearModel, r: std::ops::Range<usize>| -> Vec<(usize, f64)> {
                let p = m.fitted(&sub.row_range(r.clone()).with_intercept());
                dfit.origins[r].iter().copied().zip(p).collect()
            };
            match fit(s.train.clone()) {
                Ok(m) => SplitPredictions {
                    validation: keyed(&m, s.validation.clone()),
                    test: keyed(&m, s.test.clone()),
                },
                Err(_) => SplitPredictions {
                    validation: Vec::new(),
                    test: Vec::new(),
                },
            }
        })
        .collect();
    info!(
        "{} h={horizon}: {} of {} columns, validation RMSE {:.4}",
        recipe.variant,
        cols.len(),
        x.cols(),
        evaluation.mean_validation
    );
    Ok(MemberFit {
        model: BaseModel {
            variant: recipe.variant,
            horizon,
            design,
            model,
            evaluation,
            cv_plan: plan.clone(),
        },
        selection,
        predictions,
    })
}

/// The M0 features ranked by absolute standardised LASSO coefficient at the
/// cross-validated penalty, strongest first, at most `pool_size` of them.
/// Ties are broken by label.
pub fn rank_pool(
    frame: &TimeFrame,
    horizon: usize,
    recipe: &Recipe,
    plan: &CvPlan,
    cfg: &SelectionConfig,
    pool_size: usize,
) -> Result<Vec<Feature>> {
    let mut r0 = recipe.clone();
    r0.variant = ModelVariant::M0;
    let dfit = build_design(frame, horizon, &r0, Some(&fitting_origins(plan)))?;
    let dplan = design_plan(&dfit.origins, horizon, plan)?;
    let x = &dfit.matrix.matrix;
    let cp = CrossProducts::new(x, &dfit.response, &dplan)?;
    let all: Vec<usize> = (0..x.cols()).collect();
    let sel = select_lambda_cached(&cp, x, &dfit.response, &all, &cfg.path)?;
    let fit = fit_cached(&cp, &all, sel.lambda, &cfg.path)?;
    let labels = dfit.matrix.labels();
    let mut ranked = fit.active_set.clone();
    ranked.sort_by(|&a, &b| {
        fit.beta[b]
            .abs()
            .total_cmp(&fit.beta[a].abs())
            .then_with(|| labels[a].cmp(&labels[b]))
    });
    ranked.truncate(pool_size);
    if ranked.is_empty() {
        return Err(Error::Numerical(format!(
            "LASSO kept no M0 feature at horizon {horizon}; the interaction pool is empty"
        )));
    }
    debug!(
        "h={horizon} pool: {:?}",
        ranked.iter().map(|&k| labels[k].as_str()).collect::<Vec<_>>()
    );
    Ok(ranked.into_iter().map(|k| dfit.design.features[k].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::make_plan;

    #[test]
    fn design_plan_keeps_targets_inside_training_windows() {
        let origins: Vec<usize> = (47..400).collect();
        let plan = make_plan(400, 2, 50, 50, 200).unwrap();
        let d = design_plan(&origins, 6, &plan).unwrap();
        // split 1 trains on origins 47..194, whose targets end at 199
        assert_eq!(d.splits[0].train, 0..147);
        assert_eq!(origins[d.splits[0].validation.start], 200);
        assert_eq!(origins[d.splits[1].train.end - 1] + 6, 299);
        assert!(design_plan(&origins, 6, &make_plan(400, 2, 50, 50, 50).unwrap()).is_err());
    }
}
