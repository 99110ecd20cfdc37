use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use log::info;
use serde::{Deserialize, Serialize};

use super::member::{build_base_model, rank_pool, MemberFit, RecipeConfig};
use super::plan::{HorizonPlan, ResponseKind, Route, HORIZONS};
use super::{Prediction, WeightedEnsemble};
use crate::arima::{auto_fit, corrected_forecast, default_candidates, fit_arima, ArimaModel, ArimaOrder};
use crate::basis::design::{Feature, ModelVariant};
use crate::cv::{CvConfig, Evaluation};
use crate::error::{Error, Result};
use crate::exec::par_map;
use crate::featsel::{SelectionConfig, SelectionReport};
use crate::timeseries::{format_timestamp, write_atomic, TimeFrame};

/// How the residual model is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectorChoice {
    /// The fixed order for the response kind.
    Preset,
    /// AIC search over the default candidate orders.
    Auto,
    Order(ArimaOrder),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub cv: CvConfig,
    pub recipe: RecipeConfig,
    pub selection: SelectionConfig,
    pub members: Vec<ModelVariant>,
    /// Coverage of the prediction intervals.
    pub level: f64,
    pub corrector: CorrectorChoice,
    /// Most recent residuals used to fit the residual model.
    pub residual_window: usize,
    /// Residuals fed to the residual model at forecast time.
    pub history_len: usize,
    /// Overrides the default plan, e.g. `1-6:corrected,7-24:ensemble`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    pub source: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            cv: CvConfig::default(),
            recipe: RecipeConfig::default(),
            selection: SelectionConfig::default(),
            members: vec![ModelVariant::M1, ModelVariant::M2, ModelVariant::M3],
            level: 0.95,
            corrector: CorrectorChoice::Preset,
            residual_window: 8760,
            history_len: 672,
            plan: None,
            source: super::plan::DEFAULT_SOURCE,
        }
    }
}

impl EnsembleConfig {
    pub fn horizon_plan(&self, kind: ResponseKind) -> Result<HorizonPlan> {
        let plan = match &self.plan {
            Some(text) => HorizonPlan::parse(text, self.source)?,
            None => HorizonPlan {
                source: self.source,
                ..HorizonPlan::for_kind(kind)
            },
        };
        plan.validate()?;
        Ok(plan)
    }

    fn check(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Config("the ensemble needs at least one member".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if self.history_len < 2 || self.residual_window < 2 {
            return Err(Error::Config("residual window and history length must be ≥ 2".into()));
        }
        Ok(())
    }
}

/// Residual model of the source-horizon ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corrector {
    pub source: usize,
    pub model: ArimaModel,
    pub history_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompoundForecaster {
    pub kind: ResponseKind,
    pub response: String,
    pub level: f64,
    pub plan: HorizonPlan,
    pub ensembles: BTreeMap<usize, WeightedEnsemble>,
    pub corrector: Option<Corrector>,
}

/// One row of a 24-hour forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForecastRow {
    pub timestamp: DateTime<Utc>,
    pub horizon: usize,
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ForecastRow {
    pub const CSV_HEADER: &'static str = "timestamp,horizon,point,lo95,hi95";

    pub fn to_csv_line(&self) -> String {
        use crate::timeseries::format_value;
        format!(
            "{},{},{},{},{}",
            format_timestamp(self.timestamp),
            self.horizon,
            format_value(self.point),
            format_value(self.lo),
            format_value(self.hi)
        )
    }
}

/// Contiguous run of finite values ending at the last element.
fn trailing_run(values: &[Option<f64>]) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().rev().map_while(|v| *v).collect();
    out.reverse();
    out
}

impl CompoundForecaster {
    fn ensemble(&self, h: usize) -> Result<&WeightedEnsemble> {
        self.ensembles
            .get(&h)
            .ok_or_else(|| Error::Config(format!("no ensemble was fitted for horizon {h}")))
    }

    /// Forecasts of horizon `h` issued at each of `origins`, following the
    /// plan's route. `None` marks an origin whose inputs are incomplete.
    pub fn forecast_horizon(&self, frame: &TimeFrame, origins: &[usize], h: usize) -> Result<Vec<Option<Prediction>>> {
        self.forecast_route(frame, origins, h, self.plan.route(h))
    }

    /// Like [`forecast_horizon`](Self::forecast_horizon) with an explicit route.
    pub fn forecast_route(
        &self,
        frame: &TimeFrame,
        origins: &[usize],
        h: usize,
        route: Route,
    ) -> Result<Vec<Option<Prediction>>> {
        if h == 0 || h > HORIZONS {
            return Err(Error::InvalidArgument(format!("horizon {h} is outside 1..=24")));
        }
        match route {
            Route::Ensemble => self.ensemble(h)?.predict(frame, origins, self.level),
            Route::Uncorrected | Route::Corrected => {
                let s = self.plan.source;
                if h > s {
                    return Err(Error::Config(format!(
                        "horizon {h} cannot reuse the h={s} ensemble"
                    )));
                }
                let corrector = match route {
                    Route::Corrected => Some(self.corrector.as_ref().ok_or_else(|| {
                        Error::Config("the plan needs a residual corrector but none was fitted".into())
                    })?),
                    _ => None,
                };
                self.shifted(frame, origins, h, corrector)
            }
        }
    }

    fn shifted(
        &self,
        frame: &TimeFrame,
        origins: &[usize],
        k: usize,
        corrector: Option<&Corrector>,
    ) -> Result<Vec<Option<Prediction>>> {
        if origins.is_empty() {
            return Ok(Vec::new());
        }
        let s = self.plan.source;
        let ens = self.ensemble(s)?;
        let y = frame.values(&self.response)?;
        let l = corrector.map_or(0, |c| c.history_len);
        let min_t = *origins.iter().min().unwrap();
        let max_t = *origins.iter().max().unwrap();
        // origins of every source forecast needed, for both the bases and the residual histories
        let lo = (min_t + 1).saturating_sub(l + s).min((min_t + k).saturating_sub(s));
        let hi = max_t + k - s;
        let range: Vec<usize> = (lo..=hi).collect();
        let preds = ens.predict(frame, &range, self.level)?;
        let at = |o: usize| if o < lo || o > hi { None } else { preds[o - lo] };
        let resid = |tau: usize| -> Option<f64> {
            let p = at(tau.checked_sub(s)?)?;
            let v = *y.get(tau)?;
            v.is_finite().then(|| v - p.point)
        };
        origins
            .iter()
            .map(|&t| {
                let Some(base) = (t + k).checked_sub(s).and_then(at) else {
                    return Ok(None);
                };
                let Some(c) = corrector else {
                    return Ok(Some(base));
                };
                let window: Vec<Option<f64>> = ((t + 1).saturating_sub(l)..=t).map(resid).collect();
                let history = trailing_run(&window);
                if history.len() <= c.model.memory() + c.model.start() {
                    return Ok(None);
                }
                let var = base.estimation_sd * base.estimation_sd;
                let cf = corrected_forecast(base.point, var, &c.model, &history, k, self.level)?;
                Ok(Some(Prediction {
                    point: cf.point,
                    lo: cf.lo,
                    hi: cf.hi,
                    estimation_sd: base.estimation_sd,
                }))
            })
            .collect()
    }

    /// Explains why horizon `h` has no forecast at origin `t`.
    fn diagnose(&self, frame: &TimeFrame, t: usize, h: usize) -> Error {
        let (ens_h, origin) = match self.plan.route(h) {
            Route::Ensemble => (h, Some(t)),
            _ => (self.plan.source, (t + h).checked_sub(self.plan.source)),
        };
        if let (Ok(ens), Some(o)) = (self.ensemble(ens_h), origin) {
            for m in &ens.members {
                if let Err(e) = m.design.row(frame, o) {
                    return e;
                }
            }
        }
        Error::Data(format!(
            "horizon {h}: not enough complete history before {} for the residual correction",
            format_timestamp(frame.timestamp(t))
        ))
    }

    /// Forecasts for the 24 hours after origin `t`.
    pub fn forecast_24h(&self, frame: &TimeFrame, t: usize) -> Result<Vec<ForecastRow>> {
        if t + HORIZONS >= frame.n_rows() {
            return Err(Error::Data(format!(
                "forecast origin row {t} needs {HORIZONS} rows after it; the frame has {}",
                frame.n_rows()
            )));
        }
        (1..=HORIZONS)
            .map(|h| {
                let p = self.forecast_horizon(frame, &[t], h)?[0].ok_or_else(|| self.diagnose(frame, t, h))?;
                Ok(ForecastRow {
                    timestamp: frame.timestamp(t + h),
                    horizon: h,
                    point: p.point,
                    lo: p.lo.min(p.point),
                    hi: p.hi.max(p.point),
                })
            })
            .collect()
    }

    /// Forecast table as CSV text.
    pub fn forecast_csv(rows: &[ForecastRow]) -> String {
        let mut s = String::from(ForecastRow::CSV_HEADER);
        s.push('\n');
        for r in rows {
            s.push_str(&r.to_csv_line());
            s.push('\n');
        }
        s
    }

    fn ensemble_file(h: usize) -> String {
        format!("ensemble_h{h:02}.json")
    }

    /// Writes a manifest plus one JSON file per fitted model.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::new();
        for (h, ens) in &self.ensembles {
            let name = Self::ensemble_file(*h);
            let text = serde_json::to_string_pretty(ens).expect("ensemble serialises");
            write_atomic(&dir.join(&name), text.as_bytes())?;
            files.push(name);
        }
        let corrector = match &self.corrector {
            Some(c) => {
                let text = serde_json::to_string_pretty(c).expect("corrector serialises");
                write_atomic(&dir.join(CORRECTOR_FILE), text.as_bytes())?;
                Some(CORRECTOR_FILE.to_string())
            }
            None => None,
        };
        let manifest = Manifest {
            format: FORMAT,
            kind: self.kind,
            response: self.response.clone(),
            level: self.level,
            plan: self.plan.clone(),
            ensembles: files,
            corrector,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mpath = dir.join(MANIFEST_FILE);
        if !mpath.is_file() {
            return Err(Error::Data(format!(
                "model directory {} is incomplete; missing: {MANIFEST_FILE}",
                dir.display()
            )));
        }
        let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::json(&mpath, e))?;
        if manifest.format != FORMAT {
            return Err(Error::Config(format!(
                "model directory format {} is not supported (expected {FORMAT})",
                manifest.format
            )));
        }
        manifest.plan.validate()?;
        let mut expected: Vec<String> = manifest
            .plan
            .ensemble_horizons()
            .into_iter()
            .map(Self::ensemble_file)
            .collect();
        for f in &manifest.ensembles {
            if !expected.contains(f) {
                expected.push(f.clone());
            }
        }
        if manifest.plan.needs_corrector() || manifest.corrector.is_some() {
            expected.push(CORRECTOR_FILE.to_string());
        }
        let missing: Vec<&str> = expected
            .iter()
            .filter(|f| !dir.join(f).is_file())
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Data(format!(
                "model directory {} is incomplete; missing: {}",
                dir.display(),
                missing.join(", ")
            )));
        }
        let read = |name: &str| -> Result<String> {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
        };
        let mut ensembles = BTreeMap::new();
        for f in expected.iter().filter(|f| f.as_str() != CORRECTOR_FILE) {
            let p = dir.join(f);
            let ens: WeightedEnsemble = serde_json::from_str(&read(f)?).map_err(|e| Error::json(&p, e))?;
            ensembles.insert(ens.horizon, ens);
        }
        let corrector = if expected.iter().any(|f| f == CORRECTOR_FILE) {
            let p = dir.join(CORRECTOR_FILE);
            Some(serde_json::from_str(&read(CORRECTOR_FILE)?).map_err(|e| Error::json(&p, e))?)
        } else {
            None
        };
        Ok(Self {
            kind: manifest.kind,
            response: manifest.response,
            level: manifest.level,
            plan: manifest.plan,
            ensembles,
            corrector,
        })
    }
}

const FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
const CORRECTOR_FILE: &str = "corrector.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: u32,
    kind: ResponseKind,
    response: String,
    level: f64,
    plan: HorizonPlan,
    ensembles: Vec<String>,
    corrector: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub variant: ModelVariant,
    pub n_features: usize,
    pub weight: f64,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonEvaluation {
    pub horizon: usize,
    pub members: Vec<MemberSummary>,
    pub ensemble: Evaluation,
}

/// Forecast accuracy of one horizon on held-out origins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonScore {
    pub horizon: usize,
    pub route: Route,
    pub n: usize,
    pub rmse: Option<f64>,
    /// Share of targets inside the interval.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub horizon: usize,
    pub variant: ModelVariant,
    /// Interaction pool handed to the variant, strongest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pool: Vec<String>,
    pub report: SelectionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub kind: ResponseKind,
    pub response: String,
    pub plan: String,
    pub horizons: Vec<HorizonEvaluation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrector: Option<String>,
    /// Scores of the plan's routes on the last test block.
    pub holdout: Vec<HorizonScore>,
}

/// Everything [`build_compound`] produces.
#[derive(Debug, Clone)]
pub struct Trained {
    pub forecaster: CompoundForecaster,
    pub selections: Vec<SelectionRecord>,
    pub report: TrainingReport,
}

struct HorizonFit {
    ensemble: WeightedEnsemble,
    evaluation: HorizonEvaluation,
    selections: Vec<SelectionRecord>,
}

fn fit_horizon(
    frame: &TimeFrame,
    response: &str,
    h: usize,
    cfg: &EnsembleConfig,
    plan: &crate::cv::CvPlan,
) -> Result<HorizonFit> {
    let needs_pool = cfg
        .members
        .iter()
        .any(|v| matches!(v, ModelVariant::M2 | ModelVariant::M3));
    let pool: Vec<Feature> = if needs_pool {
        let r0 = cfg.recipe.recipe(ModelVariant::M0, frame, response, h);
        rank_pool(frame, h, &r0, plan, &cfg.selection, cfg.recipe.pool_size)?
    } else {
        Vec::new()
    };
    let mut fits: Vec<MemberFit> = Vec::new();
    for &variant in &cfg.members {
        let mut recipe = cfg.recipe.recipe(variant, frame, response, h);
        if matches!(variant, ModelVariant::M2 | ModelVariant::M3) {
            recipe.pool = pool.clone();
        }
        fits.push(build_base_model(frame, h, &recipe, plan, &cfg.selection)?);
    }
    let ensemble = WeightedEnsemble::new(fits.iter().map(|f| f.model.clone()).collect())?;
    let preds: Vec<_> = fits.iter().map(|f| f.predictions.clone()).collect();
    let ens_eval = ensemble.evaluate(&preds, frame.values(response)?)?;
    let members = fits
        .iter()
        .zip(&ensemble.weights)
        .map(|(f, w)| MemberSummary {
            variant: f.model.variant,
            n_features: f.model.design.len(),
            weight: *w,
            evaluation: f.model.evaluation.clone(),
        })
        .collect();
    let pool_labels: Vec<String> = pool.iter().map(Feature::label).collect();
    let selections = fits
        .into_iter()
        .map(|f| SelectionRecord {
            horizon: h,
            variant: f.model.variant,
            pool: if matches!(f.model.variant, ModelVariant::M2 | ModelVariant::M3) {
                pool_labels.clone()
            } else {
                Vec::new()
            },
            report: f.selection,
        })
        .collect();
    info!(
        "h={h}: weights {:?}, ensemble validation RMSE {:.4}",
        ensemble.weights, ens_eval.mean_validation
    );
    Ok(HorizonFit {
        ensemble,
        evaluation: HorizonEvaluation {
            horizon: h,
            members,
            ensemble: ens_eval,
        },
        selections,
    })
}

fn fit_corrector(
    frame: &TimeFrame,
    response: &str,
    kind: ResponseKind,
    ens: &WeightedEnsemble,
    fit_end: usize,
    cfg: &EnsembleConfig,
) -> Result<Corrector> {
    let s = ens.horizon;
    let origins: Vec<usize> = (0..fit_end.saturating_sub(s)).collect();
    let preds = ens.predict(frame, &origins, cfg.level)?;
    let y = frame.values(response)?;
    let resid: Vec<Option<f64>> = origins
        .iter()
        .zip(&preds)
        .map(|(&t, p)| {
            let v = y[t + s];
            p.filter(|_| v.is_finite()).map(|p| v - p.point)
        })
        .collect();
    let mut series = trailing_run(&resid);
    if series.len() > cfg.residual_window {
        series.drain(..series.len() - cfg.residual_window);
    }
    let model = match cfg.corrector {
        CorrectorChoice::Preset => fit_arima(
            &series,
            match kind {
                ResponseKind::Average => ArimaOrder::preset_average(),
                ResponseKind::Marginal => ArimaOrder::preset_marginal(),
            },
        )?,
        CorrectorChoice::Auto => auto_fit(&series, &default_candidates())?,
        CorrectorChoice::Order(o) => fit_arima(&series, o)?,
    };
    info!("residual corrector {} on {} residuals", model.order, series.len());
    Ok(Corrector {
        source: s,
        model,
        history_len: cfg.history_len,
    })
}

/// Scores each horizon's forecasts over `origins` under the given routes.
pub fn score_routes(
    forecaster: &CompoundForecaster,
    frame: &TimeFrame,
    origins: &[usize],
    routes: &[Route],
) -> Result<Vec<HorizonScore>> {
    let y = frame.values(&forecaster.response)?;
    (1..=HORIZONS)
        .zip(routes)
        .map(|(h, &route)| {
            let preds = forecaster.forecast_route(frame, origins, h, route)?;
            let (mut sse, mut inside, mut n) = (0.0, 0usize, 0usize);
            for (&t, p) in origins.iter().zip(&preds) {
                let (Some(p), Some(&v)) = (p, y.get(t + h)) else { continue };
                if !v.is_finite() {
                    continue;
                }
                sse += (v - p.point) * (v - p.point);
                inside += usize::from(p.lo <= v && v <= p.hi);
                n += 1;
            }
            Ok(HorizonScore {
                horizon: h,
                route,
                n,
                rmse: (n > 0).then(|| (sse / n as f64).sqrt()),
                coverage: (n > 0).then(|| inside as f64 / n as f64),
            })
        })
        .collect()
}

/// Fits every ensemble the plan needs, the residual corrector, and scores the
/// result on the last test block.
pub fn build_compound(
    frame: &TimeFrame,
    response: &str,
    kind: ResponseKind,
    cfg: &EnsembleConfig,
) -> Result<Trained> {
    cfg.check()?;
    frame.column(response)?;
    let plan = cfg.horizon_plan(kind)?;
    let cv_plan = cfg.cv.plan(frame.n_rows())?;
    let horizons = plan.ensemble_horizons();
    let fits = par_map(&horizons, |&h| fit_horizon(frame, response, h, cfg, &cv_plan));
    let mut ensembles = BTreeMap::new();
    let mut evaluations = Vec::new();
    let mut selections = Vec::new();
    for fit in fits {
        let fit = fit?;
        evaluations.push(fit.evaluation);
        selections.extend(fit.selections);
        ensembles.insert(fit.ensemble.horizon, fit.ensemble);
    }
    let corrector = if plan.needs_corrector() {
        let fit_end = cv_plan.fitting_range().end;
        Some(fit_corrector(frame, response, kind, &ensembles[&plan.source], fit_end, cfg)?)
    } else {
        None
    };
    let forecaster = CompoundForecaster {
        kind,
        response: response.to_string(),
        level: cfg.level,
        plan,
        ensembles,
        corrector,
    };
    let last = cv_plan.splits.last().expect("plan has splits");
    let holdout_origins: Vec<usize> = (last.test.start..last.test.end.saturating_sub(HORIZONS)).collect();
    let holdout = score_routes(&forecaster, frame, &holdout_origins, &forecaster.plan.routes)?;
    let report = TrainingReport {
        kind,
        response: response.to_string(),
        plan: forecaster.plan.to_string(),
        horizons: evaluations,
        corrector: forecaster.corrector.as_ref().map(|c| c.model.order.to_string()),
        holdout,
    };
    Ok(Trained {
        forecaster,
        selections,
        report,
    })
}
