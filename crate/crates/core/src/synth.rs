//! Seeded synthetic hourly data with a known data-generating process.
//!
//! The response is a planted linear combination of AR(1) drivers, plus daily,
//! weekly and yearly sinusoids, an autoregressive residual and white noise.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::{epoch_hours, parse_timestamp, write_atomic, Availability, Column, TimeFrame};

/// Hours in a mean calendar year.
pub const YEAR_HOURS: f64 = 8766.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator number `counter` derived from a root seed.
pub fn stream(seed: u64, counter: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed.wrapping_add(counter)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverSpec {
    pub name: String,
    pub availability: Availability,
    pub mean: f64,
    /// AR(1) coefficient of the driver's deviation from its mean.
    pub phi: f64,
    /// Marginal standard deviation of the AR(1) part.
    pub sd: f64,
    /// Amplitude of the driver's own daily cycle.
    #[serde(default)]
    pub daily: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seasonal {
    pub daily: f64,
    pub weekly: f64,
    pub yearly: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub start: String,
    pub n_hours: usize,
    pub response: String,
    pub drivers: Vec<DriverSpec>,
    pub intercept: f64,
    /// Planted coefficient per driver name; drivers not listed get zero.
    pub coefficients: BTreeMap<String, f64>,
    pub seasonal: Seasonal,
    /// AR coefficients of the structured residual.
    pub residual_ar: Vec<f64>,
    /// Innovation standard deviation of the structured residual.
    pub residual_sd: f64,
    pub noise_sd: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let d = |name: &str, availability, mean, phi, sd, daily| DriverSpec {
            name: name.into(),
            availability,
            mean,
            phi,
            sd,
            daily,
        };
        Self {
            seed: 42,
            start: "2021-01-01T00:00:00Z".into(),
            n_hours: 2 * 8760,
            response: "intensity".into(),
            drivers: vec![
                d("wind_st", Availability::ShortTermForecast, 10.0, 0.95, 4.0, 0.0),
                d("wind_wx", Availability::WeatherForecast, 10.0, 0.95, 4.0, 0.0),
                d("price", Availability::MarketData, 50.0, 0.9, 10.0, 5.0),
                d("load", Availability::RealTime, 30.0, 0.9, 3.0, 4.0),
            ],
            intercept: 200.0,
            coefficients: [
                ("wind_st".to_string(), -4.0),
                ("wind_wx".to_string(), -3.0),
                ("price".to_string(), 1.5),
                ("load".to_string(), 2.0),
            ]
            .into_iter()
            .collect(),
            seasonal: Seasonal {
                daily: 15.0,
                weekly: 6.0,
                yearly: 20.0,
            },
            residual_ar: vec![0.8],
            residual_sd: 4.0,
            noise_sd: 2.0,
        }
    }
}

impl SyntheticSpec {
    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_hours < 2 {
            return bad(format!("n_hours must be ≥ 2, got {}", self.n_hours));
        }
        if !(self.noise_sd >= 0.0 && self.residual_sd >= 0.0) {
            return bad("noise scales must be ≥ 0".into());
        }
        for d in &self.drivers {
            if !(d.phi.abs() < 1.0 && d.sd >= 0.0) {
                return bad(format!("driver `{}` needs |phi| < 1 and sd ≥ 0", d.name));
            }
            if d.name == self.response {
                return bad(format!("driver `{}` clashes with the response name", d.name));
            }
        }
        for k in self.coefficients.keys() {
            if !self.drivers.iter().any(|d| &d.name == k) {
                return bad(format!("coefficient for unknown driver `{k}`"));
            }
        }
        Ok(())
    }
}

/// Recorded data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub spec: SyntheticSpec,
    /// Hours since the epoch of row 0, the phase reference of every sinusoid.
    pub epoch_hour0: i64,
}

impl Truth {
    /// Deterministic seasonal part at row `t`.
    pub fn seasonal_at(&self, t: usize) -> f64 {
        let s = &self.spec.seasonal;
        let e = (self.epoch_hour0 + t as i64) as f64;
        let tau = std::f64::consts::TAU;
        s.daily * (tau * e / 24.0).sin() + s.weekly * (tau * e / 168.0).sin() + s.yearly * (tau * e / YEAR_HOURS).sin()
    }

    /// Response without the residual and noise, given each driver's value.
    pub fn systematic(&self, t: usize, drivers: &BTreeMap<String, f64>) -> f64 {
        let mut y = self.spec.intercept;
        for (name, c) in &self.spec.coefficients {
            y += c * drivers[name];
        }
        y + self.seasonal_at(t)
    }
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub frame: TimeFrame,
    pub truth: Truth,
    /// The structured residual component, before white noise.
    pub residual: Vec<f64>,
}

fn ar_path(rng: &mut ChaCha8Rng, coef: &[f64], innovation_sd: f64, n: usize, burn: usize) -> Vec<f64> {
    let mut x: Vec<f64> = Vec::with_capacity(n + burn);
    for t in 0..n + burn {
        let mut v = innovation_sd * rng.sample::<f64, _>(StandardNormal);
        for (k, c) in coef.iter().enumerate() {
            if t > k {
                v += c * x[t - k - 1];
            }
        }
        x.push(v);
    }
    x.split_off(burn)
}

pub fn generate(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.check()?;
    let start = parse_timestamp(&spec.start)?;
    let n = spec.n_hours;
    let burn = 500;
    let truth = Truth {
        spec: spec.clone(),
        epoch_hour0: epoch_hours(start),
    };
    let mut columns = Vec::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, d) in spec.drivers.iter().enumerate() {
        let mut rng = stream(spec.seed, 1 + i as u64);
        let innov = d.sd * (1.0 - d.phi * d.phi).sqrt();
        let path = ar_path(&mut rng, &[d.phi], innov, n, burn);
        let v: Vec<f64> = (0..n)
            .map(|t| {
                let e = (truth.epoch_hour0 + t as i64) as f64;
                d.mean + d.daily * (std::f64::consts::TAU * e / 24.0).sin() + path[t]
            })
            .collect();
        values.insert(d.name.clone(), v.clone());
        columns.push(Column {
            name: d.name.clone(),
            availability: d.availability,
            values: v,
        });
    }
    let n_drivers = spec.drivers.len() as u64;
    let residual = if spec.residual_ar.is_empty() && spec.residual_sd == 0.0 {
        vec![0.0; n]
    } else {
        ar_path(&mut stream(spec.seed, 1 + n_drivers), &spec.residual_ar, spec.residual_sd, n, burn)
    };
    let mut noise_rng = stream(spec.seed, 2 + n_drivers);
    let y: Vec<f64> = (0..n)
        .map(|t| {
            let row: BTreeMap<String, f64> = values.iter().map(|(k, v)| (k.clone(), v[t])).collect();
            let eps = if spec.noise_sd > 0.0 {
                spec.noise_sd * noise_rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            truth.systematic(t, &row) + residual[t] + eps
        })
        .collect();
    columns.push(Column {
        name: spec.response.clone(),
        availability: Availability::RealTime,
        values: y,
    });
    Ok(Synthetic {
        frame: TimeFrame::new(start, columns)?,
        truth,
        residual,
    })
}

pub const DATA_FILE: &str = "data.csv";
pub const SCHEMA_FILE: &str = "schema.json";
pub const TRUTH_FILE: &str = "truth.json";

/// Writes `data.csv`, `schema.json` and `truth.json` into `dir`.
pub fn write(synth: &Synthetic, dir: &Path) -> Result<()> {
    synth.frame.write_csv(&dir.join(DATA_FILE))?;
    write_atomic(&dir.join(SCHEMA_FILE), synth.frame.schema().to_json().as_bytes())?;
    let truth = serde_json::to_string_pretty(&synth.truth).expect("truth serialises");
    write_atomic(&dir.join(TRUTH_FILE), truth.as_bytes())
}
