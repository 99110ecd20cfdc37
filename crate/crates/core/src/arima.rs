//! Seasonal ARIMA for residual correction.
//!
//! Conventions: the differenced series `w = (1−B)^d (1−B^M)^D x` follows
//! `φ(B)Φ(B^M) w_t = θ(B)Θ(B^M) ε_t` with `φ(B) = 1 − Σφ_i B^i` and
//! `θ(B) = 1 + Σθ_j B^j`. There is no mean term. Estimation minimises the
//! conditional sum of squares with a Nelder–Mead simplex.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exec::par_map;

/// Roots must lie outside `1 + ROOT_MARGIN`.
pub const ROOT_MARGIN: f64 = 1e-6;
const BARRIER: f64 = 1e6;
/// A fitted root closer to the unit circle than this counts as a boundary fit.
const BOUNDARY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    #[serde(rename = "P")]
    pub sp: usize,
    #[serde(rename = "D")]
    pub sd: usize,
    #[serde(rename = "Q")]
    pub sq: usize,
    #[serde(rename = "M")]
    pub period: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize, sp: usize, sd: usize, sq: usize, period: usize) -> Result<Self> {
        let o = Self {
            p,
            d,
            q,
            sp,
            sd,
            sq,
            period,
        };
        o.check()?;
        Ok(o)
    }

    pub fn nonseasonal(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            sp: 0,
            sd: 0,
            sq: 0,
            period: 1,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::Config("season length M must be ≥ 1".into()));
        }
        if self.period == 1 && self.sp + self.sd + self.sq > 0 {
            return Err(Error::Config(format!("{self}: seasonal terms need M > 1")));
        }
        Ok(())
    }

    /// Estimated coefficients, `p + q + P + Q`.
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.sp + self.sq
    }

    /// Observations consumed by differencing.
    pub fn diff_len(&self) -> usize {
        self.d + self.sd * self.period
    }

    /// Seasonal ARIMA(3,0,0)(0,1,2)₂₄, used for the average response.
    pub fn preset_average() -> Self {
        Self {
            p: 3,
            d: 0,
            q: 0,
            sp: 0,
            sd: 1,
            sq: 2,
            period: 24,
        }
    }

    /// Seasonal ARIMA(5,1,0)(2,0,0)₂₄, used for the marginal response.
    pub fn preset_marginal() -> Self {
        Self {
            p: 5,
            d: 1,
            q: 0,
            sp: 2,
            sd: 0,
            sq: 0,
            period: 24,
        }
    }
}

impl fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if self.sp + self.sd + self.sq > 0 {
            write!(f, "({},{},{})_{}", self.sp, self.sd, self.sq, self.period)?;
        }
        Ok(())
    }
}

/// Default search grid: p,q ≤ 5, d ≤ 1, P,Q ≤ 2, D ≤ 1, M = 24, ordered by
/// coefficient count then lexicographically by (p,d,q,P,D,Q), first 30 kept.
pub fn default_candidates() -> Vec<ArimaOrder> {
    let mut all = Vec::new();
    for p in 0..=5 {
        for d in 0..=1 {
            for q in 0..=5 {
                for sp in 0..=2 {
                    for sd in 0..=1 {
                        for sq in 0..=2 {
                            all.push(ArimaOrder {
                                p,
                                d,
                                q,
                                sp,
                                sd,
                                sq,
                                period: 24,
                            });
                        }
                    }
                }
            }
        }
    }
    all.sort_by_key(|o| (o.n_coefficients(), o.p, o.d, o.q, o.sp, o.sd, o.sq));
    all.truncate(30);
    all
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfReport {
    pub lags: Vec<usize>,
    pub acf: Vec<f64>,
    /// Half-width of the ±1.96/√n significance band.
    pub band: f64,
}

impl AcfReport {
    pub fn fraction_inside(&self) -> f64 {
        let inside = self.acf.iter().filter(|a| a.abs() <= self.band).count();
        inside as f64 / self.acf.len() as f64
    }
}

/// Sample autocorrelations at lags `1..=max_lag`, biased normalisation.
pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfReport> {
    let n = series.len();
    if max_lag == 0 || n <= max_lag {
        return Err(Error::InvalidArgument(format!(
            "acf needs n > max_lag ≥ 1 (n={n}, max_lag={max_lag})"
        )));
    }
    let mu = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|v| v - mu).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if c0 == 0.0 {
        return Err(Error::Numerical("acf of a constant series is undefined".into()));
    }
    let acf = (1..=max_lag)
        .map(|k| c[k..].iter().zip(&c[..n - k]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect();
    Ok(AcfReport {
        lags: (1..=max_lag).collect(),
        acf,
        band: 1.96 / (n as f64).sqrt(),
    })
}

/// Dense product of two polynomials in `B`.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `1 + sign·Σ c_i B^(i·step)`.
fn lag_poly(coef: &[f64], step: usize, sign: f64) -> Vec<f64> {
    let mut out = vec![0.0; coef.len() * step + 1];
    out[0] = 1.0;
    for (i, c) in coef.iter().enumerate() {
        out[(i + 1) * step] = sign * c;
    }
    out
}

/// `(1−B)^d (1−B^M)^D`.
fn diff_poly(d: usize, sd: usize, m: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..d {
        p = poly_mul(&p, &[1.0, -1.0]);
    }
    for _ in 0..sd {
        p = poly_mul(&p, &lag_poly(&[1.0], m, -1.0));
    }
    p
}

/// Applies `(1−B)^d (1−B^M)^D`; the output is `d + D·M` shorter.
pub fn difference(series: &[f64], d: usize, sd: usize, m: usize) -> Result<Vec<f64>> {
    let lag = d + sd * m;
    if series.len() <= lag {
        return Err(Error::Data(format!(
            "differencing needs more than {lag} observations, got {}",
            series.len()
        )));
    }
    let mut x = series.to_vec();
    for _ in 0..d {
        x = x.windows(2).map(|w| w[1] - w[0]).collect();
    }
    for _ in 0..sd {
        x = (m..x.len()).map(|t| x[t] - x[t - m]).collect();
    }
    Ok(x)
}

/// Inverts [`difference`] given the first `d + D·M` original values.
pub fn undifference(diffed: &[f64], initial: &[f64], d: usize, sd: usize, m: usize) -> Result<Vec<f64>> {
    let lag = d + sd * m;
    if initial.len() != lag {
        return Err(Error::LengthMismatch {
            expected: lag,
            actual: initial.len(),
        });
    }
    let c = diff_poly(d, sd, m);
    let mut x = initial.to_vec();
    for (k, w) in diffed.iter().enumerate() {
        let t = lag + k;
        let mut v = *w;
        for (j, cj) in c.iter().enumerate().skip(1) {
            v -= cj * x[t - j];
        }
        x.push(v);
    }
    Ok(x)
}

/// Roots of `Σ c_k z^k` by Durand–Kerner. Trailing zero coefficients are dropped.
pub fn poly_roots(coef: &[f64]) -> Vec<Complex64> {
    let deg = match coef.iter().rposition(|c| *c != 0.0) {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    let lead = coef[deg];
    let monic: Vec<f64> = coef[..=deg].iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..1000 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

/// Smallest root modulus of `1 − Σ c_i z^i` (AR form) or `1 + Σ c_i z^i`.
fn min_root_modulus(coef: &[f64], sign: f64) -> f64 {
    if coef.iter().all(|c| *c == 0.0) {
        return f64::INFINITY;
    }
    let poly = lag_poly(coef, 1, sign);
    poly_roots(&poly)
        .iter()
        .map(|r| r.norm())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
struct Coefs {
    ar: Vec<f64>,
    ma: Vec<f64>,
    sar: Vec<f64>,
    sma: Vec<f64>,
}

impl Coefs {
    fn split(o: &ArimaOrder, v: &[f64]) -> Self {
        let (ar, rest) = v.split_at(o.p);
        let (ma, rest) = rest.split_at(o.q);
        let (sar, sma) = rest.split_at(o.sp);
        Self {
            ar: ar.to_vec(),
            ma: ma.to_vec(),
            sar: sar.to_vec(),
            sma: sma.to_vec(),
        }
    }

    fn min_modulus(&self) -> f64 {
        min_root_modulus(&self.ar, -1.0)
            .min(min_root_modulus(&self.sar, -1.0))
            .min(min_root_modulus(&self.ma, 1.0))
            .min(min_root_modulus(&self.sma, 1.0))
    }

    /// `φ(B)Φ(B^M)` and `θ(B)Θ(B^M)` as dense coefficient vectors.
    fn polys(&self, m: usize) -> (Vec<f64>, Vec<f64>) {
        let ar = poly_mul(&lag_poly(&self.ar, 1, -1.0), &lag_poly(&self.sar, m, -1.0));
        let ma = poly_mul(&lag_poly(&self.ma, 1, 1.0), &lag_poly(&self.sma, m, 1.0));
        (ar, ma)
    }
}

fn sparse(poly: &[f64]) -> Vec<(usize, f64)> {
    poly.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, *c))
        .collect()
}

/// Innovations of `a(B) x = b(B) e`, zero before `start`.
fn filter(x: &[f64], a: &[(usize, f64)], b: &[(usize, f64)], start: usize) -> Vec<f64> {
    let mut e = vec![0.0; x.len()];
    for t in start..x.len() {
        let mut v = x[t];
        for &(k, c) in a {
            v += c * x[t - k];
        }
        for &(k, c) in b {
            if k <= t {
                v -= c * e[t - k];
            }
        }
        e[t] = v;
    }
    e
}

/// Conditional sum of squares on the differenced series.
fn css(w: &[f64], o: &ArimaOrder, c: &Coefs) -> (f64, usize) {
    let (ar, ma) = c.polys(o.period);
    let start = ar.len() - 1;
    let e = filter(w, &sparse(&ar), &sparse(&ma), start);
    (e[start..].iter().map(|v| v * v).sum(), w.len() - start)
}

/// Nelder–Mead minimisation with one restart from the best vertex.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, max_evals: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut best = (x0.to_vec(), f(x0));
    let mut evals = 1;
    for _restart in 0..2 {
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![best.clone()];
        for i in 0..n {
            let mut v = best.0.clone();
            v[i] += step;
            let fv = f(&v);
            evals += 1;
            simplex.push((v, fv));
        }
        while evals < max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (lo, hi) = (simplex[0].1, simplex[n].1);
            let size = simplex[1..]
                .iter()
                .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if (hi - lo).abs() <= 1e-12 * lo.abs().max(1e-300) && size < 1e-7 {
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
                .collect();
            let towards = |t: f64| -> Vec<f64> {
                (0..n)
                    .map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j]))
                    .collect()
            };
            let xr = towards(-1.0);
            let fr = f(&xr);
            evals += 1;
            if fr < simplex[0].1 {
                let xe = towards(-2.0);
                let fe = f(&xe);
                evals += 1;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = towards(-0.5);
                    let fc = f(&xc);
                    (xc, fc)
                } else {
                    let xc = towards(0.5);
                    let fc = f(&xc);
                    (xc, fc)
                };
                evals += 1;
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        for j in 0..n {
                            v.0[j] = x0[j] + 0.5 * (v.0[j] - x0[j]);
                        }
                        v.1 = f(&v.0);
                        evals += 1;
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        best = simplex.swap_remove(0);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    pub innovation_variance: f64,
    /// Observations entering the sum of squares.
    pub n_effective: usize,
    pub aic: f64,
    /// Trailing observations and innovations of the training series, aligned.
    pub tail_x: Vec<f64>,
    pub tail_e: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaForecast {
    pub mean: Vec<f64>,
    /// Forecast error variance per step, `σ² Σ_{j<h} ψ_j²`.
    pub variance: Vec<f64>,
}

/// Fits a given order by conditional sum of squares.
pub fn fit_arima(series: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    order.check()?;
    let w = difference(series, order.d, order.sd, order.period)?;
    let k = order.n_coefficients();
    let max_ar = order.p + order.sp * order.period;
    let min_len = (10 * (k + 1)).max(max_ar + 1);
    if w.len() <= min_len {
        return Err(Error::Data(format!(
            "{order} needs more than {min_len} differenced observations, got {}",
            w.len()
        )));
    }
    let objective = |v: &[f64]| -> f64 {
        let c = Coefs::split(&order, v);
        let (s, n) = css(&w, &order, &c);
        let val = s / n as f64;
        if c.min_modulus() <= 1.0 + ROOT_MARGIN || !val.is_finite() {
            val.min(1e300) + BARRIER
        } else {
            val
        }
    };
    let params = if k == 0 {
        Vec::new()
    } else {
        nelder_mead(objective, &vec![0.0; k], 0.1, 400 * (k + 1) * (k + 1)).0
    };
    let c = Coefs::split(&order, &params);
    let modulus = c.min_modulus();
    if modulus <= 1.0 + BOUNDARY {
        return Err(Error::Numerical(format!(
            "{order}: estimate sits on the stationarity/invertibility boundary (root modulus {modulus:.6}); try a higher d or D"
        )));
    }
    let (s, n_eff) = css(&w, &order, &c);
    let sigma2 = s / n_eff as f64;
    let mut model = ArimaModel {
        order,
        ar: c.ar,
        ma: c.ma,
        sar: c.sar,
        sma: c.sma,
        innovation_variance: sigma2,
        n_effective: n_eff,
        aic: n_eff as f64 * sigma2.max(f64::MIN_POSITIVE).ln() + 2.0 * (k + 1) as f64,
        tail_x: Vec::new(),
        tail_e: Vec::new(),
    };
    let e = model.innovations(series)?;
    let keep = model.memory().min(series.len());
    model.tail_x = series[series.len() - keep..].to_vec();
    model.tail_e = e[e.len() - keep..].to_vec();
    Ok(model)
}

/// Fits every candidate and keeps the lowest AIC; ties go to fewer coefficients.
///
/// Candidates lose different numbers of leading observations to differencing
/// and lags, so the AIC used for the comparison is computed over the time
/// points every candidate can score.
pub fn auto_fit(series: &[f64], candidates: &[ArimaOrder]) -> Result<ArimaModel> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("auto_fit needs at least one candidate".into()));
    }
    let fits = par_map(candidates, |o| fit_arima(series, *o));
    let mut ok = Vec::new();
    let mut first_err = None;
    for f in fits {
        match f {
            Ok(m) => ok.push(m),
            Err(e) => {
                log::debug!("auto_fit candidate failed: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    // score every candidate on the same time points
    let common = ok.iter().map(|m| m.start()).max().unwrap_or(0);
    let mut best: Option<(f64, ArimaModel)> = None;
    for m in ok {
        let Ok(e) = m.innovations(series) else { continue };
        let n = (series.len() - common) as f64;
        let s2 = e[common..].iter().map(|v| v * v).sum::<f64>() / n;
        let aic = n * s2.max(f64::MIN_POSITIVE).ln() + 2.0 * (m.order.n_coefficients() + 1) as f64;
        let better = best.as_ref().is_none_or(|(b, bm)| {
            aic < *b || (aic == *b && m.order.n_coefficients() < bm.order.n_coefficients())
        });
        if better {
            best = Some((aic, m));
        }
    }
    best.map(|(_, m)| m).ok_or_else(|| {
        Error::Numerical(format!(
            "every ARIMA candidate failed; first error: {}",
            first_err.map(|e| e.to_string()).unwrap_or_default()
        ))
    })
}

impl ArimaModel {
    fn coefs(&self) -> Coefs {
        Coefs {
            ar: self.ar.clone(),
            ma: self.ma.clone(),
            sar: self.sar.clone(),
            sma: self.sma.clone(),
        }
    }

    /// Full AR polynomial including differencing, and the MA polynomial.
    fn full_polys(&self) -> (Vec<f64>, Vec<f64>) {
        let o = &self.order;
        let (ar, ma) = self.coefs().polys(o.period);
        (poly_mul(&ar, &diff_poly(o.d, o.sd, o.period)), ma)
    }

    /// First index of the original series with a conditional innovation.
    pub fn start(&self) -> usize {
        self.full_polys().0.len() - 1
    }

    /// Lags of history the forecast recursion reaches back to.
    pub fn memory(&self) -> usize {
        let (a, b) = self.full_polys();
        (a.len() - 1).max(b.len() - 1).max(1)
    }

    /// In-sample innovations on the original scale; zero where the recursion
    /// has no history yet.
    pub fn innovations(&self, series: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.full_polys();
        let start = a.len() - 1;
        if series.len() <= start {
            return Err(Error::Data(format!(
                "{} needs more than {start} observations of history, got {}",
                self.order,
                series.len()
            )));
        }
        Ok(filter(series, &sparse(&a), &sparse(&b), start))
    }

    /// ψ-weights `ψ_0 … ψ_{h−1}` of the full (integrated) model.
    pub fn psi_weights(&self, h: usize) -> Vec<f64> {
        let (a, b) = self.full_polys();
        let mut psi = vec![0.0; h];
        for j in 0..h {
            let mut v = if j == 0 { 1.0 } else { b.get(j).copied().unwrap_or(0.0) };
            for k in 1..=j.min(a.len() - 1) {
                v -= a[k] * psi[j - k];
            }
            psi[j] = v;
        }
        psi
    }

    fn recurse(&self, x: &[f64], e: &[f64], h: usize) -> ArimaForecast {
        let (a, b) = self.full_polys();
        let (a, b) = (sparse(&a), sparse(&b));
        let n = x.len();
        let mut xs = x.to_vec();
        let mut es = e.to_vec();
        for _ in 0..h {
            let t = xs.len();
            let mut v = 0.0;
            for &(k, c) in &a {
                if k <= t {
                    v -= c * xs[t - k];
                }
            }
            for &(k, c) in &b {
                if k <= t {
                    v += c * es[t - k];
                }
            }
            xs.push(v);
            es.push(0.0);
        }
        let psi = self.psi_weights(h);
        let mut acc = 0.0;
        let variance = psi
            .iter()
            .map(|p| {
                acc += p * p;
                self.innovation_variance * acc
            })
            .collect();
        ArimaForecast {
            mean: xs[n..].to_vec(),
            variance,
        }
    }

    /// Forecasts `h` steps past the end of the training series.
    pub fn forecast(&self, h: usize) -> Result<ArimaForecast> {
        if h == 0 {
            return Err(Error::InvalidArgument("forecast horizon must be ≥ 1".into()));
        }
        Ok(self.recurse(&self.tail_x, &self.tail_e, h))
    }

    /// Forecasts `h` steps past the end of `history`, re-running the
    /// innovation filter over it with the fitted coefficients.
    pub fn forecast_from(&self, history: &[f64], h: usize) -> Result<ArimaForecast> {
        if h == 0 {
            return Err(Error::InvalidArgument("forecast horizon must be ≥ 1".into()));
        }
        if history.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("residual history contains missing values".into()));
        }
        let e = self.innovations(history)?;
        Ok(self.recurse(history, &e, h))
    }

    /// Simulates `n` observations after a burn-in of `burn`, Gaussian innovations.
    pub fn simulate<R: Rng>(&self, n: usize, burn: usize, rng: &mut R) -> Vec<f64> {
        let (a, b) = self.full_polys();
        let (a, b) = (sparse(&a), sparse(&b));
        let sd = self.innovation_variance.sqrt();
        let total = n + burn;
        let mut x = Vec::with_capacity(total);
        let mut e = Vec::with_capacity(total);
        for t in 0..total {
            let et: f64 = sd * rng.sample::<f64, _>(StandardNormal);
            let mut v = et;
            for &(k, c) in &a {
                if k <= t {
                    v -= c * x[t - k];
                }
            }
            for &(k, c) in &b {
                if k <= t {
                    v += c * e[t - k];
                }
            }
            x.push(v);
            e.push(et);
        }
        x.split_off(burn)
    }

    /// A model with given coefficients, for simulation and tests.
    pub fn from_coefficients(
        order: ArimaOrder,
        ar: Vec<f64>,
        ma: Vec<f64>,
        sar: Vec<f64>,
        sma: Vec<f64>,
        innovation_variance: f64,
    ) -> Result<Self> {
        order.check()?;
        if ar.len() != order.p || ma.len() != order.q || sar.len() != order.sp || sma.len() != order.sq {
            return Err(Error::InvalidArgument(format!(
                "coefficient counts do not match {order}"
            )));
        }
        Ok(Self {
            order,
            ar,
            ma,
            sar,
            sma,
            innovation_variance,
            n_effective: 0,
            aic: 0.0,
            tail_x: Vec::new(),
            tail_e: Vec::new(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid ARIMA model: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedForecast {
    pub point: f64,
    pub correction: f64,
    pub variance: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Two-sided standard normal quantile for a coverage `level`.
pub fn normal_quantile(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Adds the `h`-step residual forecast to a base forecast. The interval
/// variance is the sum of `base_variance` and the residual model's `h`-step
/// variance, treating the two errors as independent.
pub fn corrected_forecast(
    base: f64,
    base_variance: f64,
    model: &ArimaModel,
    residual_history: &[f64],
    h: usize,
    level: f64,
) -> Result<CorrectedForecast> {
    if residual_history.is_empty() {
        return Err(Error::Data("residual correction needs a residual history".into()));
    }
    let f = model.forecast_from(residual_history, h)?;
    let correction = f.mean[h - 1];
    let variance = base_variance + f.variance[h - 1];
    let half = normal_quantile(level) * variance.sqrt();
    let point = base + correction;
    Ok(CorrectedForecast {
        point,
        correction,
        variance,
        lo: point - half,
        hi: point + half,
    })
}
