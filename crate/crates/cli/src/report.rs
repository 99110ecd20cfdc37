use std::ops::RangeInclusive;
use std::path::Path;

use gridcast::ensemble::{CompoundForecaster, HorizonEvaluation, HorizonScore, ResponseKind, Route};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub model: String,
    pub horizons: String,
    pub mean_validation: Option<f64>,
    pub mean_test: Option<f64>,
    /// Mean ensemble weight over the horizon range; empty for combined forecasts.
    pub weight: Option<f64>,
}

/// Contents of an evaluation JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationFile {
    pub config_hash: String,
    pub seed: u64,
    pub kind: ResponseKind,
    pub response: String,
    pub plan: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector: Option<String>,
    pub rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizons: Vec<HorizonEvaluation>,
    /// Scores on the held-out origins, per horizon.
    pub holdout: Vec<HorizonScore>,
}

impl EvaluationFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::data("report", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::data("report", format!("malformed evaluation JSON in {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("evaluation serialises");
        s.push('\n');
        s
    }
}

fn range_label(r: &RangeInclusive<usize>) -> String {
    if r.start() == r.end() {
        r.start().to_string()
    } else {
        format!("{}-{}", r.start(), r.end())
    }
}

/// The plan's runs cut down to contiguous pieces inside `keep`.
fn pieces(forecaster: &CompoundForecaster, keep: &[usize]) -> Vec<(RangeInclusive<usize>, Route)> {
    let mut out: Vec<(RangeInclusive<usize>, Route)> = Vec::new();
    for (run, route) in forecaster.plan.runs() {
        for h in run.filter(|h| keep.contains(h)) {
            match out.last_mut() {
                Some((r, last)) if *last == route && *r.end() + 1 == h => *r = *r.start()..=h,
                _ => out.push((h..=h, route)),
            }
        }
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn all_or_none(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.and_then(|v| mean(v.into_iter()))
}

/// Root mean square over horizons, each weighted by its number of scored origins.
fn pooled(scores: &[HorizonScore], r: &RangeInclusive<usize>) -> Option<f64> {
    let (mut sse, mut n) = (0.0, 0usize);
    for s in scores.iter().filter(|s| r.contains(&s.horizon)) {
        if let Some(rmse) = s.rmse {
            sse += rmse * rmse * s.n as f64;
            n += s.n;
        }
    }
    (n > 0).then(|| (sse / n as f64).sqrt())
}

fn route_label(forecaster: &CompoundForecaster, route: Route) -> String {
    let s = forecaster.plan.source;
    match route {
        Route::Ensemble => "WA".into(),
        Route::Uncorrected => format!("WA{s}"),
        Route::Corrected => match &forecaster.corrector {
            Some(c) => format!("WA{s}+ARIMA{}", c.model.order),
            None => format!("WA{s}+ARIMA"),
        },
    }
}

/// Member and ensemble rows from cross-validation, plus held-out rows for
/// routes that reuse the source ensemble.
pub fn training_rows(
    forecaster: &CompoundForecaster,
    evaluations: &[HorizonEvaluation],
    holdout: &[HorizonScore],
    keep: &[usize],
) -> Vec<Row> {
    let mut rows = Vec::new();
    for (r, route) in pieces(forecaster, keep) {
        let label = range_label(&r);
        if route != Route::Ensemble {
            rows.push(Row {
                model: route_label(forecaster, route),
                horizons: label,
                mean_validation: None,
                mean_test: pooled(holdout, &r),
                weight: None,
            });
            continue;
        }
        let evs: Vec<&HorizonEvaluation> = evaluations.iter().filter(|e| r.contains(&e.horizon)).collect();
        let Some(first) = evs.first() else { continue };
        for (k, m) in first.members.iter().enumerate() {
            rows.push(Row {
                model: m.variant.to_string(),
                horizons: label.clone(),
                mean_validation: mean(evs.iter().map(|e| e.members[k].evaluation.mean_validation)),
                mean_test: all_or_none(evs.iter().map(|e| e.members[k].evaluation.mean_test)),
                weight: mean(evs.iter().map(|e| e.members[k].weight)),
            });
        }
        rows.push(Row {
            model: route_label(forecaster, route),
            horizons: label,
            mean_validation: mean(evs.iter().map(|e| e.ensemble.mean_validation)),
            mean_test: all_or_none(evs.iter().map(|e| e.ensemble.mean_test)),
            weight: None,
        });
    }
    rows
}

/// One row per plan run, scored on the given held-out origins.
pub fn holdout_rows(forecaster: &CompoundForecaster, scores: &[HorizonScore], keep: &[usize]) -> Vec<Row> {
    pieces(forecaster, keep)
        .into_iter()
        .map(|(r, route)| Row {
            model: route_label(forecaster, route),
            horizons: range_label(&r),
            mean_validation: None,
            mean_test: pooled(scores, &r),
            weight: None,
        })
        .collect()
}

/// `v` rounded to four significant digits, without exponent.
pub fn sig4(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let e = format!("{v:.3e}");
    let (mantissa, exp) = e.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let rounded: f64 = format!("{mantissa}e{exp}").parse().expect("float");
    let decimals = (3 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

fn cell(v: Option<f64>) -> String {
    v.map(sig4).unwrap_or_default()
}

pub const HEADER: [&str; 5] = ["model", "horizons", "mean_val_rmse", "mean_test_rmse", "weight"];

fn cells(rows: &[Row]) -> Vec<[String; 5]> {
    rows.iter()
        .map(|r| {
            [
                r.model.clone(),
                r.horizons.clone(),
                cell(r.mean_validation),
                cell(r.mean_test),
                cell(r.weight),
            ]
        })
        .collect()
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for c in cells(rows) {
        w.write_record(&c).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
}

pub fn to_text(rows: &[Row]) -> String {
    let body = cells(rows);
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for c in &body {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    let line = |c: &[String]| -> String {
        let parts: Vec<String> = c
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (s, w))| if i < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let head: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    let mut out = line(&head);
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(&rule));
    for c in &body {
        out.push_str(&line(c));
    }
    out
}
