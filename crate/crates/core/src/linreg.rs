//! Ordinary least squares with prediction intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, PivotedQr};

pub const INTERCEPT: &str = "(intercept)";

/// Fitted OLS model. Coefficients are in design-column order, intercept first
/// when the design carries one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub beta: Vec<f64>,
    /// Residual variance `εᵀε / (n − m)`.
    pub sigma2: f64,
    pub dof: usize,
    /// `(XᵀX)⁻¹`, row-major `m × m`.
    pub xtx_inv: Vec<f64>,
    pub provenance: Vec<String>,
}

/// Least-squares fit of `y` on the columns of `x`.
///
/// `x` must already contain the intercept column if one is wanted. The solve
/// goes through a column-pivoted QR; a rank-deficient design is reported with
/// the provenance of a dependent column.
pub fn fit_ols(x: &Matrix, y: &[f64], provenance: Vec<String>) -> Result<LinearModel> {
    let (n, m) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if provenance.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: provenance.len(),
        });
    }
    if n <= m {
        return Err(Error::Data(format!(
            "OLS needs more rows than columns ({n} rows, {m} columns)"
        )));
    }
    let qr = PivotedQr::new(x);
    if let Some(j) = qr.dependent_column() {
        return Err(Error::RankDeficient {
            column: provenance[j].clone(),
        });
    }
    let beta = qr.solve(y);
    let fitted = x.mul_vec(&beta);
    let sse: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let dof = n - m;
    Ok(LinearModel {
        beta,
        sigma2: sse / dof as f64,
        dof,
        xtx_inv: qr.gram_inverse(),
        provenance,
    })
}

/// [`fit_ols`] on `[1 | features]`.
pub fn fit_with_intercept(features: &Matrix, y: &[f64], labels: &[String]) -> Result<LinearModel> {
    let mut prov = Vec::with_capacity(labels.len() + 1);
    prov.push(INTERCEPT.to_string());
    prov.extend(labels.iter().cloned());
    fit_ols(&features.with_intercept(), y, prov)
}

/// Two-sided Student-t quantile `t_{p, dof}`.
pub fn t_quantile(p: f64, dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .map(|t| t.inverse_cdf(p))
        .unwrap_or(f64::NAN)
}

impl LinearModel {
    pub fn n_coefficients(&self) -> usize {
        self.beta.len()
    }

    fn check_len(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.beta.len() {
            return Err(Error::LengthMismatch {
                expected: self.beta.len(),
                actual: row.len(),
            });
        }
        Ok(())
    }

    /// `zᵀβ` for a full design row (including the intercept entry).
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        self.check_len(row)?;
        Ok(dot(row, &self.beta))
    }

    /// Prediction for a feature row without the leading intercept entry.
    pub fn predict_features(&self, features: &[f64]) -> Result<f64> {
        self.predict(&with_one(features))
    }

    /// `zᵀ(XᵀX)⁻¹z`.
    pub fn leverage(&self, row: &[f64]) -> Result<f64> {
        self.check_len(row)?;
        let m = row.len();
        let mut s = 0.0;
        for i in 0..m {
            let mut inner = 0.0;
            for j in 0..m {
                inner += self.xtx_inv[i * m + j] * row[j];
            }
            s += row[i] * inner;
        }
        Ok(s.max(0.0))
    }

    /// Variance of a new observation at `row`: `σ²(1 + zᵀ(XᵀX)⁻¹z)`.
    pub fn prediction_variance(&self, row: &[f64]) -> Result<f64> {
        Ok(self.sigma2 * (1.0 + self.leverage(row)?))
    }

    /// Variance of the fitted mean at `row`: `σ² zᵀ(XᵀX)⁻¹z`.
    pub fn estimation_variance(&self, row: &[f64]) -> Result<f64> {
        Ok(self.sigma2 * self.leverage(row)?)
    }

    /// Student-t prediction interval at the given coverage `level`.
    pub fn prediction_interval(&self, row: &[f64], level: f64) -> Result<(f64, f64)> {
        let point = self.predict(row)?;
        let half = t_quantile(0.5 + level / 2.0, self.dof) * self.prediction_variance(row)?.sqrt();
        Ok((point - half, point + half))
    }

    pub fn fitted(&self, x: &Matrix) -> Vec<f64> {
        x.mul_vec(&self.beta)
    }
}

pub fn with_one(features: &[f64]) -> Vec<f64> {
    let mut r = Vec::with_capacity(features.len() + 1);
    r.push(1.0);
    r.extend_from_slice(features);
    r
}

/// Root mean squared error.
pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("rmse of empty vectors".into()));
    }
    let mse = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y_true.len() as f64;
    Ok(mse.sqrt())
}
