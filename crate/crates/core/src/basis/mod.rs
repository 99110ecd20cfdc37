//! Deterministic feature expansions: Fourier seasonality, cubic B-splines,
//! natural cubic splines, periodic calendar splines and interaction terms.

pub mod design;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::Calendar;

pub use design::{build_design, Design, Feature, FeatureMatrix, ModelVariant, Recipe};

/// Cubic splines throughout.
pub const DEGREE: usize = 3;

/// Number of columns produced by [`tau_row`].
pub const TAU_WIDTH: usize = 15;

/// `[sin₁, cos₁, …, sin_n, cos_n]` at phase `2π·i·t/period`; the constant term is
/// left to the regression intercept.
pub fn fourier_terms(t: f64, order: usize, period: f64) -> Vec<f64> {
    assert!(order >= 1 && period > 0.0, "fourier_terms: order ≥ 1, period > 0");
    let mut out = Vec::with_capacity(2 * order);
    for i in 1..=order {
        let a = i as f64 * 2.0 * PI * t / period;
        out.push(a.sin());
        out.push(a.cos());
    }
    out
}

/// Boundary and interior knots of a spline basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    pub lo: f64,
    pub hi: f64,
    pub interior: Vec<f64>,
}

impl KnotVector {
    /// Sorts and de-duplicates the interior knots and checks `lo < knot < hi`.
    pub fn new(lo: f64, hi: f64, mut interior: Vec<f64>) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "degenerate knot range [{lo}, {hi}]"
            )));
        }
        interior.sort_by(|a, b| a.total_cmp(b));
        interior.dedup();
        if interior.iter().any(|&k| !(k > lo && k < hi)) {
            return Err(Error::InvalidArgument(
                "interior knots must lie strictly inside the boundary".into(),
            ));
        }
        Ok(Self { lo, hi, interior })
    }

    pub fn boundary(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, Vec::new())
    }

    /// Open knot sequence with the boundary knots repeated `DEGREE + 1` times.
    fn full(&self) -> Vec<f64> {
        let mut t = vec![self.lo; DEGREE + 1];
        t.extend_from_slice(&self.interior);
        t.extend(std::iter::repeat_n(self.hi, DEGREE + 1));
        t
    }

    /// Number of cubic B-spline basis functions on this knot vector.
    pub fn basis_len(&self) -> usize {
        self.interior.len() + DEGREE + 1
    }
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Boundary knots at the extremes, interior knots at the `k/(n+1)` quantiles.
pub fn quantile_knots(values: &[f64], n_interior: usize) -> Result<KnotVector> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (lo, hi) = match (sorted.first(), sorted.last()) {
        (Some(&a), Some(&b)) if a < b => (a, b),
        _ => {
            return Err(Error::InvalidArgument(
                "quantile_knots needs at least two distinct values".into(),
            ))
        }
    };
    let interior = (1..=n_interior)
        .map(|k| quantile_sorted(&sorted, k as f64 / (n_interior + 1) as f64))
        .filter(|&q| q > lo && q < hi)
        .collect();
    KnotVector::new(lo, hi, interior)
}

fn find_span(t: &[f64], n_basis: usize, x: f64) -> usize {
    if x >= t[n_basis] {
        return n_basis - 1;
    }
    let mut span = DEGREE;
    while span + 1 < n_basis && x >= t[span + 1] {
        span += 1;
    }
    span
}

/// Values and derivatives up to `n_deriv` of the cubic B-splines that are
/// non-zero at `x`, via the triangular Cox–de Boor scheme.
/// Returns `(span, ders)` where `ders[k][r]` is the k-th derivative of basis
/// function `span - DEGREE + r`.
fn basis_derivs(t: &[f64], n_basis: usize, x: f64, n_deriv: usize) -> (usize, Vec<Vec<f64>>) {
    let p = DEGREE;
    let span = find_span(t, n_basis, x);
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; n_deriv + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = [[0.0; DEGREE + 1]; 2];
    for r in 0..=p as isize {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=n_deriv.min(p) as isize {
            let mut d = 0.0;
            let rk = r - k;
            let pk = p as isize - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk as usize];
            }
            let j1 = if rk >= -1 { 1 } else { -rk };
            let j2 = if r - 1 <= pk { k - 1 } else { p as isize - r };
            for j in j1..=j2 {
                a[s2][j as usize] = (a[s1][j as usize] - a[s1][(j - 1) as usize])
                    / ndu[(pk + 1) as usize][(rk + j) as usize];
                d += a[s2][j as usize] * ndu[(rk + j) as usize][pk as usize];
            }
            if r <= pk {
                a[s2][k as usize] = -a[s1][(k - 1) as usize] / ndu[(pk + 1) as usize][r as usize];
                d += a[s2][k as usize] * ndu[r as usize][pk as usize];
            }
            ders[k as usize][r as usize] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        row.iter_mut().for_each(|v| *v *= factor);
        factor *= (p - k) as f64;
    }
    (span, ders)
}

/// Full basis vector (value or derivative) at `x`, no clamping.
fn basis_full(knots: &KnotVector, x: f64, deriv: usize) -> Vec<f64> {
    let t = knots.full();
    let n_basis = knots.basis_len();
    let (span, ders) = basis_derivs(&t, n_basis, x, deriv);
    let mut out = vec![0.0; n_basis];
    for r in 0..=DEGREE {
        out[span - DEGREE + r] = ders[deriv][r];
    }
    out
}

/// Cubic B-spline basis at `x` over an open knot vector.
///
/// Returns `interior.len() + 4` values; with boundary knots only that is the
/// four-function basis. Inputs outside `[lo, hi]` are clamped to the boundary.
pub fn bspline_basis(x: f64, knots: &KnotVector) -> Vec<f64> {
    basis_full(knots, x.clamp(knots.lo, knots.hi), 0)
}

/// Natural cubic spline basis: cubic between the knots, linear outside the
/// boundary, with the constant direction removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalSpline {
    pub knots: KnotVector,
    /// `(interior + 4) × count` map from B-spline values to the natural basis, row-major.
    transform: Vec<f64>,
    count: usize,
}

impl NaturalSpline {
    /// `count` basis functions need `count - 1` interior knots.
    pub fn new(knots: KnotVector) -> Self {
        let nb = knots.basis_len();
        let c_lo = basis_full(&knots, knots.lo, 2);
        let c_hi = basis_full(&knots, knots.hi, 2);
        let q = householder_q(&[c_lo, c_hi], nb);
        // Null space of the boundary second-derivative constraints is Q[:, 2..];
        // its first direction is dropped so the basis excludes an intercept.
        let count = nb - 3;
        let mut transform = vec![0.0; nb * count];
        for i in 0..nb {
            for k in 0..count {
                transform[i * count + k] = q[i * nb + k + 3];
            }
        }
        Self {
            knots,
            transform,
            count,
        }
    }

    pub fn from_values(values: &[f64], count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument("natural spline count must be ≥ 1".into()));
        }
        let knots = quantile_knots(values, count - 1)?;
        Ok(Self::new(knots))
    }

    pub fn count(&self) -> usize {
        self.count
    }

    fn project(&self, b: &[f64]) -> Vec<f64> {
        (0..self.count)
            .map(|k| {
                b.iter()
                    .enumerate()
                    .map(|(i, v)| v * self.transform[i * self.count + k])
                    .sum()
            })
            .collect()
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let (lo, hi) = (self.knots.lo, self.knots.hi);
        if x < lo || x > hi {
            let b = if x < lo { lo } else { hi };
            let v = self.project(&basis_full(&self.knots, b, 0));
            let d = self.project(&basis_full(&self.knots, b, 1));
            v.iter().zip(&d).map(|(v, d)| v + (x - b) * d).collect()
        } else {
            self.project(&basis_full(&self.knots, x, 0))
        }
    }
}

/// Natural cubic spline basis values at `x`; `knots` must carry `count - 1`
/// interior knots.
pub fn natural_spline_basis(x: f64, knots: &KnotVector, count: usize) -> Result<Vec<f64>> {
    if knots.interior.len() + 1 != count {
        return Err(Error::InvalidArgument(format!(
            "natural spline with {count} functions needs {} interior knots, got {}",
            count.saturating_sub(1),
            knots.interior.len()
        )));
    }
    Ok(NaturalSpline::new(knots.clone()).eval(x))
}

/// Orthogonal `Q` (row-major `n × n`) from the Householder QR of the `n × k`
/// matrix whose columns are `cols`.
fn householder_q(cols: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    for k in 0..a.len() {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut v = a[k].clone();
        v[..k].iter_mut().for_each(|x| *x = 0.0);
        let s = if v[k] >= 0.0 { 1.0 } else { -1.0 };
        v[k] += s * norm;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        // H = I - 2 v vᵀ / vᵀv; apply to the remaining columns and accumulate Q = Q H.
        for col in a.iter_mut().skip(k) {
            let f = 2.0 * col.iter().zip(&v).map(|(c, v)| c * v).sum::<f64>() / vv;
            col.iter_mut().zip(&v).for_each(|(c, v)| *c -= f * v);
        }
        for i in 0..n {
            let row = &mut q[i * n..(i + 1) * n];
            let f = 2.0 * row.iter().zip(&v).map(|(r, v)| r * v).sum::<f64>() / vv;
            row.iter_mut().zip(&v).for_each(|(r, v)| *r -= f * v);
        }
    }
    q
}

/// Uniform cubic B-spline centred at 0 with unit knot spacing.
fn cardinal_cubic(u: f64) -> f64 {
    let a = u.abs();
    if a < 1.0 {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    } else if a < 2.0 {
        let b = 2.0 - a;
        b * b * b / 6.0
    } else {
        0.0
    }
}

/// `count` periodic cubic B-splines with equally spaced knots over `period`;
/// spline `j` peaks at `period·(j + ½)/count`. Needs `count ≥ 5` so a spline
/// never overlaps its own periodic copy.
pub fn periodic_splines(x: f64, period: f64, count: usize) -> Vec<f64> {
    let spacing = period / count as f64;
    (0..count)
        .map(|j| {
            let centre = spacing * (j as f64 + 0.5);
            let d = (x - centre).rem_euclid(period);
            let d = if d >= period / 2.0 { d - period } else { d };
            cardinal_cubic(d / spacing)
        })
        .collect()
}

const TAU_SPLINES: usize = 5;

/// The 15 calendar features of one hour: raw hour/weekday/month, their sine
/// encodings, and the inner three of five periodic splines for each.
pub fn tau_row(cal: Calendar) -> [f64; TAU_WIDTH] {
    let (h, w, m) = (cal.hour as f64, cal.weekday as f64, cal.month as f64);
    let mut out = [0.0; TAU_WIDTH];
    out[0] = h;
    out[1] = w;
    out[2] = m;
    out[3] = (2.0 * PI * h / 24.0).sin();
    out[4] = (2.0 * PI * w / 7.0).sin();
    out[5] = (2.0 * PI * m / 12.0).sin();
    for (block, (x, period)) in [(h, 24.0), (w, 7.0), (m, 12.0)].into_iter().enumerate() {
        let s = periodic_splines(x, period, TAU_SPLINES);
        out[6 + 3 * block..9 + 3 * block].copy_from_slice(&s[1..4]);
    }
    out
}

pub const TAU_NAMES: [&str; TAU_WIDTH] = [
    "hour", "weekday", "month", "sin_hour", "sin_weekday", "sin_month", "hour_bs2", "hour_bs3",
    "hour_bs4", "weekday_bs2", "weekday_bs3", "weekday_bs4", "month_bs2", "month_bs3", "month_bs4",
];

/// `[z_i, z_j, z_i·z_j]`.
pub fn interaction(zi: &[f64], zj: &[f64]) -> Result<[Vec<f64>; 3]> {
    if zi.len() != zj.len() {
        return Err(Error::LengthMismatch {
            expected: zi.len(),
            actual: zj.len(),
        });
    }
    let prod = zi.iter().zip(zj).map(|(a, b)| a * b).collect();
    Ok([zi.to_vec(), zj.to_vec(), prod])
}

/// Columns of the spline-wrapped interaction, each labelled `(source, k)` with
/// `source` 0 = z_i, 1 = z_j, 2 = product.
pub struct SplineInteraction {
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<(usize, usize)>,
}

/// `bs_k` of `z_i`, `z_j` and `z_i·z_j` for `k = 0..4`, knots per column from
/// [`quantile_knots`]. A constant product drops its block with a warning.
pub fn spline_interaction(zi: &[f64], zj: &[f64], n_interior: usize) -> Result<SplineInteraction> {
    let [a, b, prod] = interaction(zi, zj)?;
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    for (source, z) in [a, b, prod].iter().enumerate() {
        let knots = match quantile_knots(z, n_interior) {
            Ok(k) => k,
            Err(_) if source == 2 => {
                log::warn!("constant interaction product; dropping its spline block");
                continue;
            }
            Err(e) => return Err(e),
        };
        let rows: Vec<Vec<f64>> = z.iter().map(|&x| bspline_basis(x, &knots)).collect();
        for k in 0..knots.basis_len() {
            columns.push(rows.iter().map(|r| r[k]).collect());
            labels.push((source, k));
        }
    }
    Ok(SplineInteraction { columns, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook recursive Cox–de Boor with 0/0 := 0 over the half-open spans.
    fn cox_de_boor(t: &[f64], i: usize, k: usize, x: f64) -> f64 {
        if k == 0 {
            return if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = t[i + k] - t[i];
        if d1 > 0.0 {
            v += (x - t[i]) / d1 * cox_de_boor(t, i, k - 1, x);
        }
        let d2 = t[i + k + 1] - t[i + 1];
        if d2 > 0.0 {
            v += (t[i + k + 1] - x) / d2 * cox_de_boor(t, i + 1, k - 1, x);
        }
        v
    }

    #[test]
    fn fourier_examples() {
        let z = fourier_terms(0.0, 3, 24.0);
        assert_eq!(z, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let q = fourier_terms(6.0, 1, 24.0);
        assert!((q[0] - 1.0).abs() < 1e-15 && q[1].abs() < 1e-15);
        let v = fourier_terms(18.0, 2, 24.0);
        let oracle = [
            (3.0 * PI / 2.0).sin(),
            (3.0 * PI / 2.0).cos(),
            (3.0 * PI).sin(),
            (3.0 * PI).cos(),
        ];
        for (a, b) in v.iter().zip(oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((v[0] + 1.0).abs() < 1e-12 && (v[3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bspline_clamped_ends() {
        let k = KnotVector::boundary(2.0, 7.0).unwrap();
        assert_eq!(bspline_basis(2.0, &k), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(bspline_basis(7.0, &k), vec![0.0, 0.0, 0.0, 1.0]);
        // clamping outside the range
        assert_eq!(bspline_basis(-5.0, &k), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(KnotVector::boundary(1.0, 1.0).is_err());
    }

    #[test]
    fn bspline_matches_recursive_oracle() {
        let k = KnotVector::boundary(0.0, 1.0).unwrap();
        let t = k.full();
        let got = bspline_basis(0.5, &k);
        let want: Vec<f64> = (0..4).map(|i| cox_de_boor(&t, i, 3, 0.5)).collect();
        // Bernstein values at ½: 1/8, 3/8, 3/8, 1/8
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-14);
            assert!(*g > 0.0);
        }
        assert!((want[1] - 0.375).abs() < 1e-15);

        let k = KnotVector::new(0.0, 10.0, vec![2.5, 4.0, 7.0]).unwrap();
        let t = k.full();
        for &x in &[0.3, 2.5, 3.1, 6.99, 9.7] {
            let got = bspline_basis(x, &k);
            for (i, g) in got.iter().enumerate() {
                assert!((g - cox_de_boor(&t, i, 3, x)).abs() < 1e-13, "x={x} i={i}");
            }
        }
    }

    #[test]
    fn quantile_knot_examples() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(quantile_knots(&v, 1).unwrap().interior, vec![50.0]);
        assert_eq!(quantile_knots(&v, 3).unwrap().interior, vec![25.0, 50.0, 75.0]);
        assert!(quantile_knots(&[3.0; 5], 2).is_err());

        // skewed sample against sort-and-interpolate
        let s = [9.0, 0.1, 0.2, 0.4, 0.3, 5.0, 0.25, 1.5];
        let k = quantile_knots(&s, 2).unwrap();
        let mut sorted = s.to_vec();
        sorted.sort_by(f64::total_cmp);
        // p = 1/3: h = 7/3 → between sorted[2]=0.25 and sorted[3]=0.3
        let h1 = 7.0 * (1.0 / 3.0);
        let q1 = sorted[2] + (h1 - 2.0) * (sorted[3] - sorted[2]);
        // p = 2/3: h = 14/3 → between sorted[4]=0.4 and sorted[5]=1.5
        let h2 = 7.0 * (2.0 / 3.0);
        let q2 = sorted[4] + (h2 - 4.0) * (sorted[5] - sorted[4]);
        assert_eq!(k.interior, vec![q1, q2]);
        assert_eq!((k.lo, k.hi), (0.1, 9.0));
    }

    /// Natural cubic spline basis from truncated powers (N1 = 1, N2 = x,
    /// N_{k+2} = d_k − d_{K−1}).
    fn truncated_power_ns(x: f64, xi: &[f64]) -> Vec<f64> {
        let kk = xi.len();
        let d = |k: usize| {
            let p = |v: f64| if v > 0.0 { v * v * v } else { 0.0 };
            (p(x - xi[k]) - p(x - xi[kk - 1])) / (xi[kk - 1] - xi[k])
        };
        let mut out = vec![1.0, x];
        for k in 0..kk - 2 {
            out.push(d(k) - d(kk - 2));
        }
        out
    }

    #[test]
    fn natural_spline_lies_in_textbook_space() {
        let knots = KnotVector::new(0.0, 10.0, vec![2.0, 5.0, 6.5]).unwrap();
        let ns = NaturalSpline::new(knots.clone());
        assert_eq!(ns.count(), 4);
        let mut xi = vec![0.0];
        xi.extend(&knots.interior);
        xi.push(10.0);
        // Least-squares map from the oracle basis to each ns column over a grid.
        let grid: Vec<f64> = (0..=200).map(|i| -2.0 + 14.0 * i as f64 / 200.0).collect();
        let a = crate::linalg::Matrix::from_columns(
            &(0..xi.len())
                .map(|c| grid.iter().map(|&x| truncated_power_ns(x, &xi)[c]).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
        let qr = crate::linalg::PivotedQr::new(&a);
        assert!(qr.is_full_rank());
        let coefs: Vec<Vec<f64>> = (0..4)
            .map(|k| qr.solve(&grid.iter().map(|&x| ns.eval(x)[k]).collect::<Vec<_>>()))
            .collect();
        for &x in &[-1.3, 0.7, 3.3, 6.0, 9.9, 11.5] {
            let base = truncated_power_ns(x, &xi);
            let got = ns.eval(x);
            for k in 0..4 {
                let want: f64 = base.iter().zip(&coefs[k]).map(|(b, c)| b * c).sum();
                assert!((got[k] - want).abs() < 1e-9, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn natural_spline_linear_outside_and_continuous() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 4.0 + i as f64 * 0.1).collect();
        let ns = NaturalSpline::from_values(&v, 4).unwrap();
        let hi = ns.knots.hi;
        let lo = ns.knots.lo;
        let delta = 0.5;
        for b in [hi, lo - 2.0 * delta] {
            let (a, m, c) = (ns.eval(b), ns.eval(b + delta), ns.eval(b + 2.0 * delta));
            for k in 0..4 {
                assert!((a[k] - 2.0 * m[k] + c[k]).abs() < 1e-8);
            }
        }
        for &x in &ns.knots.interior {
            let (l, r) = (ns.eval(x - 1e-9), ns.eval(x + 1e-9));
            for k in 0..4 {
                assert!(l[k].is_finite() && (l[k] - r[k]).abs() < 1e-6);
            }
        }
        assert!(natural_spline_basis(0.5, &KnotVector::boundary(0.0, 1.0).unwrap(), 3).is_err());
    }

    #[test]
    fn tau_examples() {
        let at = |hour, weekday, month| tau_row(Calendar { hour, weekday, month });
        let r = at(0, 2, 5);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[3], 0.0);
        // midday spline (spline 3, stored at offset 7) peaks at hour 12
        let daily: Vec<f64> = (0..24).map(|h| at(h, 0, 1)[7]).collect();
        let argmax = (0..24).max_by(|&a, &b| daily[a].total_cmp(&daily[b])).unwrap();
        assert_eq!(argmax, 12);
        // five periodic splines sum to one
        for x in [0.0, 3.3, 23.9] {
            let s: f64 = periodic_splines(x, 24.0, 5).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interaction_examples() {
        let [_, _, p] = interaction(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(p, vec![3.0, 8.0]);
        let [_, _, z] = interaction(&[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
        let [_, _, q] = interaction(&[3.0, 4.0], &[1.0, 2.0]).unwrap();
        assert_eq!(p, q);
        assert!(interaction(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spline_interaction_examples() {
        let zi = [0.0, 1.0, 2.0, 3.0, 0.5];
        let zj = [1.0, -1.0, 2.0, 0.5, 3.0];
        let si = spline_interaction(&zi, &zj, 0).unwrap();
        assert_eq!(si.columns.len(), 12);
        // row 0 has z_i at its minimum
        assert_eq!(
            (0..4).map(|k| si.columns[k][0]).collect::<Vec<_>>(),
            vec![1.0, 0.0, 0.0, 0.0]
        );
        // composition with bspline_basis over the interaction output
        let [_, _, prod] = interaction(&zi, &zj).unwrap();
        let knots = quantile_knots(&prod, 0).unwrap();
        for (r, &p) in prod.iter().enumerate() {
            let b = bspline_basis(p, &knots);
            for k in 0..4 {
                assert_eq!(si.columns[8 + k][r], b[k]);
            }
        }
        // constant product drops its block
        let si = spline_interaction(&zi, &[0.0; 5], 0);
        assert!(si.is_err(), "constant z_j itself is an error");
        let si = spline_interaction(&[1.0, -1.0, 1.0], &[1.0, -1.0, 1.0], 0).unwrap();
        assert_eq!(si.columns.len(), 8);
    }
}
