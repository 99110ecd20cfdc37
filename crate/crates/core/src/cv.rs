//! Rolling-forward cross-validation: growing training windows, each followed
//! by a fresh validation block and a fresh test block.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::par_map;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub splits: Vec<Split>,
}

/// Segment lengths; the first training window takes whatever remains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_splits: usize,
    pub validation_len: usize,
    pub test_len: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        // four weeks of hours
        Self {
            n_splits: 8,
            validation_len: 672,
            test_len: 672,
        }
    }
}

impl CvConfig {
    pub fn plan(&self, n_rows: usize) -> Result<CvPlan> {
        let used = self.n_splits * (self.validation_len + self.test_len);
        if n_rows <= used {
            return Err(Error::Data(format!(
                "cross-validation needs more than {used} rows, got {n_rows}"
            )));
        }
        make_plan(
            n_rows,
            self.n_splits,
            self.validation_len,
            self.test_len,
            n_rows - used,
        )
    }
}

/// Split `k` (1-based) trains on `[0, min_train + (k−1)(val+test))`, validates on
/// the next `validation_len` rows and tests on the `test_len` rows after that.
pub fn make_plan(
    n_rows: usize,
    n_splits: usize,
    validation_len: usize,
    test_len: usize,
    min_train_len: usize,
) -> Result<CvPlan> {
    if n_splits == 0 || validation_len == 0 || min_train_len == 0 {
        return Err(Error::InvalidArgument(
            "n_splits, validation_len and min_train_len must be positive".into(),
        ));
    }
    let required = min_train_len + n_splits * (validation_len + test_len);
    if n_rows < required {
        return Err(Error::Data(format!(
            "cross-validation plan needs at least {required} rows, got {n_rows}"
        )));
    }
    let step = validation_len + test_len;
    let splits = (0..n_splits)
        .map(|k| {
            let train_end = min_train_len + k * step;
            let val_end = train_end + validation_len;
            Split {
                train: 0..train_end,
                validation: train_end..val_end,
                test: val_end..val_end + test_len,
            }
        })
        .collect();
    Ok(CvPlan { splits })
}

impl CvPlan {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Rows ever used for training or validation: `[0, end of last validation)`.
    pub fn fitting_range(&self) -> Range<usize> {
        0..self.splits.last().map_or(0, |s| s.validation.end)
    }

    /// Largest training window.
    pub fn max_train(&self) -> Range<usize> {
        0..self.splits.iter().map(|s| s.train.end).max().unwrap_or(0)
    }

    /// Checks the structural invariants against a row count.
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("invalid CV plan: {m}")));
        if self.splits.is_empty() {
            return bad("no splits");
        }
        for (k, s) in self.splits.iter().enumerate() {
            if s.train.start != 0 || s.train.is_empty() {
                return bad("training windows start at row 0 and are non-empty");
            }
            if s.validation.start < s.train.end || s.test.start < s.validation.end {
                return bad("segments overlap or run backwards");
            }
            if s.test.end > n_rows || s.validation.end > n_rows {
                return bad("segment beyond the data");
            }
            if k > 0 {
                let prev = &self.splits[k - 1];
                if s.train.end < prev.validation.end {
                    return bad("training window must absorb the previous validation block");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub validation: Option<f64>,
    pub test: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub per_split: Vec<SplitScore>,
    pub mean_validation: f64,
    /// `None` when the plan has no test rows.
    pub mean_test: Option<f64>,
    /// Every split fitted successfully.
    pub complete: bool,
}

/// Arithmetic mean in slice order.
pub fn ordered_mean(values: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    s / values.len() as f64
}

/// Refits a pipeline from scratch on each split's training rows and scores it
/// on the split's validation and test rows.
///
/// `fit` receives only the training range; `predict` receives a row range and
/// returns one prediction per row. Splits run through [`par_map`] and are
/// reduced in split order.
pub fn evaluate<M, F, P>(
    plan: &CvPlan,
    y: &[f64],
    fit: F,
    predict: P,
    metric: fn(&[f64], &[f64]) -> Result<f64>,
) -> Result<Evaluation>
where
    F: Fn(Range<usize>) -> Result<M> + Sync + Send,
    P: Fn(&M, Range<usize>) -> Result<Vec<f64>> + Sync + Send,
{
    plan.validate(y.len())?;
    let scores: Vec<SplitScore> = par_map(&plan.splits, |s| {
        let run = || -> Result<(f64, f64)> {
            let model = fit(s.train.clone())?;
            let pv = predict(&model, s.validation.clone())?;
            let v = metric(&y[s.validation.clone()], &pv)?;
            let t = if s.test.is_empty() {
                f64::NAN
            } else {
                let pt = predict(&model, s.test.clone())?;
                metric(&y[s.test.clone()], &pt)?
            };
            Ok((v, t))
        };
        match run() {
            Ok((v, t)) => SplitScore {
                validation: Some(v),
                test: t.is_finite().then_some(t),
                error: None,
            },
            Err(e) => SplitScore {
                validation: None,
                test: None,
                error: Some(e.to_string()),
            },
        }
    });
    let vals: Vec<f64> = scores.iter().filter_map(|s| s.validation).collect();
    let tests: Vec<f64> = scores.iter().filter_map(|s| s.test).collect();
    if vals.is_empty() {
        let first = scores
            .iter()
            .find_map(|s| s.error.clone())
            .unwrap_or_default();
        return Err(Error::Numerical(format!("every split failed: {first}")));
    }
    Ok(Evaluation {
        complete: scores.iter().all(|s| s.error.is_none()),
        per_split: scores,
        mean_validation: ordered_mean(&vals),
        mean_test: (!tests.is_empty()).then(|| ordered_mean(&tests)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linreg::rmse;

    #[test]
    fn worked_example() {
        let p = make_plan(100, 2, 10, 10, 60).unwrap();
        assert_eq!(
            p.splits,
            vec![
                Split {
                    train: 0..60,
                    validation: 60..70,
                    test: 70..80
                },
                Split {
                    train: 0..80,
                    validation: 80..90,
                    test: 90..100
                }
            ]
        );
        p.validate(100).unwrap();
    }

    #[test]
    fn single_split_is_holdout() {
        let p = make_plan(50, 1, 10, 5, 30).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.splits[0].train, 0..30);
    }

    #[test]
    fn insufficient_rows_reports_minimum() {
        let err = make_plan(99, 2, 10, 10, 60).unwrap_err().to_string();
        assert!(err.contains("100"), "{err}");
    }

    #[test]
    fn perfect_predictor_scores_zero() {
        let y: Vec<f64> = (0..120).map(|i| i as f64 * 0.5).collect();
        let plan = make_plan(120, 3, 10, 10, 60).unwrap();
        let e = evaluate(
            &plan,
            &y,
            |_| Ok(()),
            |_, r| Ok(r.map(|i| i as f64 * 0.5).collect()),
            rmse,
        )
        .unwrap();
        assert_eq!(e.mean_validation, 0.0);
        assert_eq!(e.mean_test, Some(0.0));
        assert!(e.complete);
    }

    #[test]
    fn failures_are_recorded_per_split() {
        let y = vec![1.0; 120];
        let plan = make_plan(120, 3, 10, 10, 60).unwrap();
        let e = evaluate(
            &plan,
            &y,
            |r| {
                if r.end == 60 {
                    Err(Error::Numerical("boom".into()))
                } else {
                    Ok(())
                }
            },
            |_, r| Ok(vec![1.0; r.len()]),
            rmse,
        )
        .unwrap();
        assert!(!e.complete);
        assert_eq!(e.per_split[0].error.as_deref(), Some("numerical failure: boom"));
        assert_eq!(e.mean_validation, 0.0);
    }
}
