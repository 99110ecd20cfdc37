//! Design-matrix assembly for the four model recipes.
//!
//! A forecast made at origin `t` for target `t + h` sees forecast-type columns
//! at `t + h`, moving averages and lags of real-time columns ending at `t`, and
//! calendar terms of the target hour. Every column carries a [`Feature`]
//! describing how to recompute it, so a fitted [`Design`] can be replayed on
//! new data.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::rc::Rc;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use super::{
    bspline_basis, fourier_terms, quantile_knots, tau_row, KnotVector, NaturalSpline, TAU_NAMES,
    TAU_WIDTH,
};
use crate::error::{Error, Result};
use crate::linalg::{mean, std_dev, Matrix};
use crate::timeseries::{epoch_hours, Availability, Calendar, TimeFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum ModelVariant {
    M0,
    M1,
    M2,
    M3,
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Time axis of a Fourier term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// Hours since the Unix epoch.
    Hour,
    /// Fractional days since the Unix epoch.
    Day,
    /// Calendar months since year 0.
    Month,
}

impl TimeUnit {
    fn at(self, ts: DateTime<Utc>) -> f64 {
        match self {
            TimeUnit::Hour => epoch_hours(ts) as f64,
            TimeUnit::Day => epoch_hours(ts) as f64 / 24.0,
            TimeUnit::Month => (ts.year() as f64) * 12.0 + ts.month0() as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierSpec {
    pub unit: TimeUnit,
    pub period: f64,
    pub order: usize,
}

/// Provenance of one design column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    /// Value of a forecast-type column at the target hour.
    Forecast { column: String },
    /// Mean of the `window` hours ending at the origin.
    MovingAverage { column: String, window: usize },
    /// Value `hours` before the origin.
    Lag { column: String, hours: usize },
    Fourier {
        unit: TimeUnit,
        period: f64,
        order: usize,
        cosine: bool,
    },
    Tau { index: usize },
    /// `exp((inner − mean) / sd)` with training-row statistics.
    Exp {
        inner: Box<Feature>,
        mean: f64,
        sd: f64,
    },
    BSpline {
        inner: Box<Feature>,
        knots: KnotVector,
        index: usize,
    },
    NaturalSpline {
        inner: Box<Feature>,
        spline: NaturalSpline,
        index: usize,
    },
    Product {
        left: Box<Feature>,
        right: Box<Feature>,
    },
}

impl Feature {
    pub fn label(&self) -> String {
        match self {
            Feature::Forecast { column } => format!("{column}[t+h]"),
            Feature::MovingAverage { column, window } => format!("ma{window}({column})"),
            Feature::Lag { column, hours } => format!("lag{hours}({column})"),
            Feature::Fourier {
                unit,
                period,
                order,
                cosine,
            } => format!(
                "fs_{}{}_{}{order}",
                match unit {
                    TimeUnit::Hour => "h",
                    TimeUnit::Day => "d",
                    TimeUnit::Month => "m",
                },
                period,
                if *cosine { "cos" } else { "sin" }
            ),
            Feature::Tau { index } => format!("tau_{}", TAU_NAMES[*index]),
            Feature::Exp { inner, .. } => format!("exp({})", inner.label()),
            Feature::BSpline { inner, index, .. } => format!("bs{index}({})", inner.label()),
            Feature::NaturalSpline { inner, index, .. } => format!("ns{index}({})", inner.label()),
            Feature::Product { left, right } => format!("{}*{}", left.label(), right.label()),
        }
    }

    /// Source columns of the frame this feature reads.
    pub fn sources(&self, out: &mut BTreeSet<String>) {
        match self {
            Feature::Forecast { column }
            | Feature::MovingAverage { column, .. }
            | Feature::Lag { column, .. } => {
                out.insert(column.clone());
            }
            Feature::Fourier { .. } | Feature::Tau { .. } => {}
            Feature::Exp { inner, .. }
            | Feature::BSpline { inner, .. }
            | Feature::NaturalSpline { inner, .. } => inner.sources(out),
            Feature::Product { left, right } => {
                left.sources(out);
                right.sources(out);
            }
        }
    }

    fn boxed(self) -> Box<Feature> {
        Box::new(self)
    }
}

fn default_windows() -> Vec<usize> {
    vec![24, 48]
}

fn default_fourier() -> Vec<FourierSpec> {
    vec![
        FourierSpec {
            unit: TimeUnit::Hour,
            period: 24.0,
            order: 2,
        },
        FourierSpec {
            unit: TimeUnit::Day,
            period: 7.0,
            order: 1,
        },
        FourierSpec {
            unit: TimeUnit::Month,
            period: 12.0,
            order: 2,
        },
    ]
}

fn default_pool_size() -> usize {
    50
}

fn default_ns_count() -> usize {
    4
}

fn default_true() -> bool {
    true
}

/// What goes into a design matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub variant: ModelVariant,
    pub response: String,
    /// Read at the target hour; must be available at the horizon.
    #[serde(default)]
    pub forecast_columns: Vec<String>,
    /// Summarised by moving averages ending at the origin.
    #[serde(default)]
    pub realtime_columns: Vec<String>,
    #[serde(default = "default_windows")]
    pub ma_windows: Vec<usize>,
    #[serde(default = "default_fourier")]
    pub fourier: Vec<FourierSpec>,
    /// Interior knots of the four-function cubic B-spline blocks.
    #[serde(default)]
    pub bspline_interior: usize,
    #[serde(default = "default_ns_count")]
    pub ns_count: usize,
    /// Upper bound on the interaction pool for M2/M3.
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    /// Interact pool features with the calendar block as well as with each other.
    #[serde(default = "default_true")]
    pub tau_interactions: bool,
    /// Interaction pool (ranked M0 features) for M2/M3.
    #[serde(default)]
    pub pool: Vec<Feature>,
}

impl Recipe {
    pub fn new(variant: ModelVariant, response: &str) -> Self {
        Self {
            variant,
            response: response.to_string(),
            forecast_columns: Vec::new(),
            realtime_columns: Vec::new(),
            ma_windows: default_windows(),
            fourier: default_fourier(),
            bspline_interior: 0,
            ns_count: default_ns_count(),
            pool_size: default_pool_size(),
            tau_interactions: true,
            pool: Vec::new(),
        }
    }

    /// Every non-response column in its natural role: forecast-type columns are
    /// read at the target hour, real-time columns through moving averages.
    pub fn from_frame(variant: ModelVariant, frame: &TimeFrame, response: &str) -> Self {
        let mut r = Self::new(variant, response);
        for c in frame.columns() {
            if c.name == response {
                continue;
            }
            match c.availability {
                Availability::RealTime => r.realtime_columns.push(c.name.clone()),
                _ => r.forecast_columns.push(c.name.clone()),
            }
        }
        r
    }

    /// Drops forecast columns that are not available at `horizon`.
    pub fn restricted_to(&self, frame: &TimeFrame, horizon: usize) -> Self {
        let mut r = self.clone();
        r.forecast_columns.retain(|c| {
            frame
                .column(c)
                .map(|col| col.availability != Availability::RealTime && col.availability.usable_at(horizon))
                .unwrap_or(true)
        });
        r
    }

    /// The columns of `z*`: forecasts, moving averages and the lagged response.
    pub fn base_features(&self) -> Vec<Feature> {
        let mut out: Vec<Feature> = self
            .forecast_columns
            .iter()
            .map(|c| Feature::Forecast { column: c.clone() })
            .collect();
        for c in &self.realtime_columns {
            for &w in &self.ma_windows {
                out.push(Feature::MovingAverage {
                    column: c.clone(),
                    window: w,
                });
            }
        }
        out.push(Feature::Lag {
            column: self.response.clone(),
            hours: 0,
        });
        out
    }

    pub fn fourier_features(&self) -> Vec<Feature> {
        let mut out = Vec::new();
        for s in &self.fourier {
            for order in 1..=s.order {
                for cosine in [false, true] {
                    out.push(Feature::Fourier {
                        unit: s.unit,
                        period: s.period,
                        order,
                        cosine,
                    });
                }
            }
        }
        out
    }

    fn check(&self, frame: &TimeFrame, horizon: usize) -> Result<()> {
        frame.column(&self.response)?;
        for c in &self.realtime_columns {
            frame.column(c)?;
        }
        let mut offending = Vec::new();
        for c in &self.forecast_columns {
            let col = frame.column(c)?;
            if col.availability == Availability::RealTime || !col.availability.usable_at(horizon) {
                offending.push(c.clone());
            }
        }
        if !offending.is_empty() {
            return Err(Error::Unavailable {
                horizon,
                columns: offending,
            });
        }
        if matches!(self.variant, ModelVariant::M2 | ModelVariant::M3) && self.pool.is_empty() {
            return Err(Error::Config(format!(
                "{} recipe needs a non-empty interaction pool",
                self.variant
            )));
        }
        Ok(())
    }
}

/// Numeric design matrix with per-column provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub matrix: Matrix,
    pub features: Vec<Feature>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn labels(&self) -> Vec<String> {
        self.features.iter().map(Feature::label).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            matrix: self.matrix.select_columns(idx),
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
        }
    }

    /// CSV with one `# <index>: <label>` comment line per column before the header.
    pub fn write_csv<W: Write>(&self, mut w: W, response: Option<&[f64]>) -> std::io::Result<()> {
        let labels = self.labels();
        for (i, l) in labels.iter().enumerate() {
            writeln!(w, "# {i}: {l}")?;
        }
        let mut header = String::new();
        for i in 0..labels.len() {
            if i > 0 {
                header.push(',');
            }
            let _ = write!(header, "x{i}");
        }
        if response.is_some() {
            header.push_str(",y");
        }
        writeln!(w, "{header}")?;
        for r in 0..self.n_rows() {
            let mut line = String::new();
            for j in 0..self.n_cols() {
                if j > 0 {
                    line.push(',');
                }
                let _ = write!(line, "{}", self.matrix.get(r, j));
            }
            if let Some(y) = response {
                let _ = write!(line, ",{}", y[r]);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// A fitted, replayable list of design columns for one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub horizon: usize,
    pub response: String,
    pub features: Vec<Feature>,
}

/// Column evaluator over a fixed set of origins, caching shared sub-terms.
struct Evaluator<'a> {
    frame: &'a TimeFrame,
    horizon: usize,
    origins: &'a [usize],
    cache: HashMap<String, Rc<Vec<f64>>>,
    ma: HashMap<(String, usize), Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(frame: &'a TimeFrame, horizon: usize, origins: &'a [usize]) -> Self {
        Self {
            frame,
            horizon,
            origins,
            cache: HashMap::new(),
            ma: HashMap::new(),
        }
    }

    fn target_time(&self, t: usize) -> DateTime<Utc> {
        self.frame.timestamp(t + self.horizon)
    }

    fn eval(&mut self, f: &Feature) -> Result<Rc<Vec<f64>>> {
        let key = f.label();
        if let Some(v) = self.cache.get(&key) {
            return Ok(Rc::clone(v));
        }
        let n = self.frame.n_rows();
        let values: Vec<f64> = match f {
            Feature::Forecast { column } => {
                let x = self.frame.values(column)?;
                self.origins
                    .iter()
                    .map(|&t| x.get(t + self.horizon).copied().unwrap_or(f64::NAN))
                    .collect()
            }
            Feature::MovingAverage { column, window } => {
                let k = (column.clone(), *window);
                if !self.ma.contains_key(&k) {
                    let ma = self.frame.moving_average(column, *window)?;
                    self.ma.insert(k.clone(), ma);
                }
                let ma = &self.ma[&k];
                self.origins.iter().map(|&t| ma[t]).collect()
            }
            Feature::Lag { column, hours } => {
                let x = self.frame.values(column)?;
                self.origins
                    .iter()
                    .map(|&t| if t >= *hours { x[t - hours] } else { f64::NAN })
                    .collect()
            }
            Feature::Fourier {
                unit,
                period,
                order,
                cosine,
            } => self
                .origins
                .iter()
                .map(|&t| {
                    let z = fourier_terms(unit.at(self.target_time(t)), *order, *period);
                    z[2 * (order - 1) + usize::from(*cosine)]
                })
                .collect(),
            Feature::Tau { index } => self
                .origins
                .iter()
                .map(|&t| tau_row(Calendar::of(self.target_time(t)))[*index])
                .collect(),
            Feature::Exp { inner, mean, sd } => {
                let z = self.eval(inner)?;
                z.iter().map(|v| ((v - mean) / sd).exp()).collect()
            }
            Feature::BSpline { inner, knots, .. } => {
                let z = self.eval(inner)?;
                let rows: Vec<Vec<f64>> = z
                    .iter()
                    .map(|&v| {
                        if v.is_nan() {
                            vec![f64::NAN; knots.basis_len()]
                        } else {
                            bspline_basis(v, knots)
                        }
                    })
                    .collect();
                // fill every sibling column of this block at once
                for k in 0..knots.basis_len() {
                    let sib = Feature::BSpline {
                        inner: inner.clone(),
                        knots: knots.clone(),
                        index: k,
                    };
                    self.cache
                        .insert(sib.label(), Rc::new(rows.iter().map(|r| r[k]).collect()));
                }
                return Ok(Rc::clone(&self.cache[&key]));
            }
            Feature::NaturalSpline { inner, spline, .. } => {
                let z = self.eval(inner)?;
                let rows: Vec<Vec<f64>> = z
                    .iter()
                    .map(|&v| {
                        if v.is_nan() {
                            vec![f64::NAN; spline.count()]
                        } else {
                            spline.eval(v)
                        }
                    })
                    .collect();
                for k in 0..spline.count() {
                    let sib = Feature::NaturalSpline {
                        inner: inner.clone(),
                        spline: spline.clone(),
                        index: k,
                    };
                    self.cache
                        .insert(sib.label(), Rc::new(rows.iter().map(|r| r[k]).collect()));
                }
                return Ok(Rc::clone(&self.cache[&key]));
            }
            Feature::Product { left, right } => {
                let a = self.eval(left)?;
                let b = self.eval(right)?;
                a.iter().zip(b.iter()).map(|(x, y)| x * y).collect()
            }
        };
        debug_assert!(values.len() == self.origins.len() && n > 0);
        let rc = Rc::new(values);
        self.cache.insert(key, Rc::clone(&rc));
        Ok(rc)
    }
}

impl Design {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.features.iter().map(Feature::label).collect()
    }

    pub fn select(&self, idx: &[usize]) -> Design {
        Design {
            horizon: self.horizon,
            response: self.response.clone(),
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
        }
    }

    /// Origins at which the target hour lies inside the frame.
    pub fn candidate_origins(&self, frame: &TimeFrame) -> Vec<usize> {
        (0..frame.n_rows().saturating_sub(self.horizon)).collect()
    }

    /// Evaluates every column at `origins`; missing inputs give `NaN`.
    pub fn evaluate(&self, frame: &TimeFrame, origins: &[usize]) -> Result<Matrix> {
        let mut ev = Evaluator::new(frame, self.horizon, origins);
        let mut m = Matrix::zeros(origins.len(), 0);
        for f in &self.features {
            let col = ev.eval(f)?;
            m.push_column(&col);
        }
        Ok(m)
    }

    /// Feature row at origin `t`, failing with the first missing column.
    pub fn row(&self, frame: &TimeFrame, t: usize) -> Result<Vec<f64>> {
        if t + self.horizon >= frame.n_rows() {
            return Err(Error::Data(format!(
                "origin {} + horizon {} lies beyond the frame",
                frame.timestamp(t).format("%Y-%m-%dT%H:%M:%SZ"),
                self.horizon
            )));
        }
        let m = self.evaluate(frame, &[t])?;
        let row = m.row(0);
        if let Some(j) = row.iter().position(|v| v.is_nan()) {
            let mut src = BTreeSet::new();
            self.features[j].sources(&mut src);
            return Err(Error::Data(format!(
                "feature `{}` (columns {:?}) is missing at horizon {} for origin {}",
                self.features[j].label(),
                src,
                self.horizon,
                frame.timestamp(t).format("%Y-%m-%dT%H:%M:%SZ")
            )));
        }
        Ok(row)
    }

    /// Response `y[t + h]` at each origin.
    pub fn response(&self, frame: &TimeFrame, origins: &[usize]) -> Result<Vec<f64>> {
        let y = frame.values(&self.response)?;
        Ok(origins
            .iter()
            .map(|&t| y.get(t + self.horizon).copied().unwrap_or(f64::NAN))
            .collect())
    }

    /// Origins where every column and the response are present.
    pub fn complete_origins(&self, frame: &TimeFrame) -> Result<Vec<usize>> {
        let cand = self.candidate_origins(frame);
        let m = self.evaluate(frame, &cand)?;
        let y = self.response(frame, &cand)?;
        Ok(cand
            .into_iter()
            .enumerate()
            .filter(|&(r, _)| !y[r].is_nan() && (0..m.cols()).all(|j| !m.get(r, j).is_nan()))
            .map(|(_, t)| t)
            .collect())
    }
}

/// Output of [`build_design`].
#[derive(Debug, Clone)]
pub struct DesignFit {
    pub design: Design,
    pub matrix: FeatureMatrix,
    pub response: Vec<f64>,
    /// Origin row of each matrix row.
    pub origins: Vec<usize>,
}

fn is_constant(x: &[f64]) -> bool {
    let m = mean(x);
    std_dev(x) <= 1e-12 * (1.0 + m.abs())
}

/// Assembles the design for `recipe` at horizon `h`.
///
/// Data-dependent parameters (exponential standardisation, spline knots) are
/// estimated on the complete rows among `fit_origins`; pass `None` to use every
/// complete row. Rows of the returned matrix are all complete origins in time
/// order; columns constant over the fitting rows are dropped.
pub fn build_design(
    frame: &TimeFrame,
    horizon: usize,
    recipe: &Recipe,
    fit_origins: Option<&[usize]>,
) -> Result<DesignFit> {
    recipe.check(frame, horizon)?;
    let base = recipe.base_features();

    // complete cases over the raw inputs
    let probe = Design {
        horizon,
        response: recipe.response.clone(),
        features: match recipe.variant {
            ModelVariant::M0 | ModelVariant::M1 => base.clone(),
            ModelVariant::M2 | ModelVariant::M3 => recipe.pool.clone(),
        },
    };
    let origins = probe.complete_origins(frame)?;
    if origins.is_empty() {
        return Err(Error::Data(format!(
            "no complete rows for horizon {horizon}; the data range is unusable"
        )));
    }
    let fit_rows: Vec<usize> = match fit_origins {
        Some(f) => {
            let set: BTreeSet<usize> = f.iter().copied().collect();
            origins
                .iter()
                .enumerate()
                .filter(|(_, t)| set.contains(t))
                .map(|(r, _)| r)
                .collect()
        }
        None => (0..origins.len()).collect(),
    };
    if fit_rows.len() < 2 {
        return Err(Error::Data("fewer than two complete fitting rows".into()));
    }

    let mut ev = Evaluator::new(frame, horizon, &origins);
    let fit_values = |ev: &mut Evaluator, f: &Feature| -> Result<Vec<f64>> {
        let col = ev.eval(f)?;
        Ok(fit_rows.iter().map(|&r| col[r]).collect())
    };

    let tau: Vec<Feature> = (0..TAU_WIDTH).map(|index| Feature::Tau { index }).collect();
    let mut features: Vec<Feature> = Vec::new();
    let push_bs = |ev: &mut Evaluator, inner: &Feature, out: &mut Vec<Feature>| -> Result<()> {
        let vals = fit_values(ev, inner)?;
        match quantile_knots(&vals, recipe.bspline_interior) {
            Ok(knots) => {
                for index in 0..knots.basis_len() {
                    out.push(Feature::BSpline {
                        inner: inner.clone().boxed(),
                        knots: knots.clone(),
                        index,
                    });
                }
            }
            Err(_) => log::debug!("skipping spline block of constant `{}`", inner.label()),
        }
        Ok(())
    };

    match recipe.variant {
        ModelVariant::M0 => {
            features.extend(base.iter().cloned());
            features.extend(recipe.fourier_features());
        }
        ModelVariant::M1 => {
            features.extend(base.iter().cloned());
            for f in &base {
                let vals = fit_values(&mut ev, f)?;
                let (m, sd) = (mean(&vals), std_dev(&vals));
                if sd > 0.0 {
                    features.push(Feature::Exp {
                        inner: f.clone().boxed(),
                        mean: m,
                        sd,
                    });
                }
            }
            features.extend(recipe.fourier_features());
            features.extend(tau.iter().cloned());
            for f in &base {
                push_bs(&mut ev, f, &mut features)?;
            }
            for f in &base {
                let vals = fit_values(&mut ev, f)?;
                if let Ok(spline) = NaturalSpline::from_values(&vals, recipe.ns_count) {
                    for index in 0..spline.count() {
                        features.push(Feature::NaturalSpline {
                            inner: f.clone().boxed(),
                            spline: spline.clone(),
                            index,
                        });
                    }
                }
            }
        }
        ModelVariant::M2 | ModelVariant::M3 => {
            let pool: Vec<Feature> = recipe.pool.iter().take(recipe.pool_size).cloned().collect();
            let mut linear: Vec<Feature> = pool.clone();
            linear.extend(tau.iter().cloned());
            let mut products = Vec::new();
            for i in 0..pool.len() {
                for j in i + 1..pool.len() {
                    products.push(Feature::Product {
                        left: pool[i].clone().boxed(),
                        right: pool[j].clone().boxed(),
                    });
                }
            }
            if recipe.tau_interactions {
                for p in &pool {
                    for t in &tau {
                        products.push(Feature::Product {
                            left: p.clone().boxed(),
                            right: t.clone().boxed(),
                        });
                    }
                }
            }
            if recipe.variant == ModelVariant::M2 {
                features.extend(linear);
                features.extend(products);
            } else {
                for f in linear.iter().chain(&products) {
                    push_bs(&mut ev, f, &mut features)?;
                }
            }
        }
    }

    // evaluate, drop constants and duplicate provenance
    let mut seen = BTreeSet::new();
    let mut kept = Vec::new();
    let mut columns = Vec::new();
    for f in features {
        if !seen.insert(f.label()) {
            continue;
        }
        let col = ev.eval(&f)?;
        let fit: Vec<f64> = fit_rows.iter().map(|&r| col[r]).collect();
        if is_constant(&fit) {
            log::debug!("dropping constant column `{}`", f.label());
            continue;
        }
        columns.push(col.as_ref().clone());
        kept.push(f);
    }
    drop(ev);
    let design = Design {
        horizon,
        response: recipe.response.clone(),
        features: kept,
    };
    let response = design.response(frame, &origins)?;
    let matrix = FeatureMatrix {
        matrix: Matrix::from_columns(&columns),
        features: design.features.clone(),
    };
    Ok(DesignFit {
        design,
        matrix,
        response,
        origins,
    })
}
