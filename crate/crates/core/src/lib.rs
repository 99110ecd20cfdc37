//! Short-term forecasting of grid CO₂ emission intensity.
//!
//! The pipeline turns hourly grid and weather series into design matrices
//! ([`basis`]), selects features with correlation pruning, LASSO and forward
//! selection ([`featsel`]), fits ordinary least-squares base models
//! ([`linreg`]), corrects their residuals with seasonal ARIMA ([`arima`]) and
//! combines everything into a horizon-routed ensemble ([`ensemble`]).

pub mod arima;
pub mod basis;
pub mod cv;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod featsel;
pub mod gram;
pub mod lasso;
pub mod linalg;
pub mod linreg;
pub mod synth;
pub mod timeseries;

pub use error::{Error, ErrorKind, Result};
