mod common;

use chrono::Duration;
use common::rng;
use gridcast::basis::{bspline_basis, fourier_terms, quantile_knots, tau_row, KnotVector};
use gridcast::timeseries::{parse_timestamp, Calendar};
use rand::Rng;

#[test]
fn bsplines_sum_to_one_inside_the_boundary() {
    let mut r = rng(1);
    for trial in 0..100 {
        let n_interior = trial % 6;
        let interior: Vec<f64> = (0..n_interior).map(|_| r.random_range(0.0..10.0)).collect();
        let knots = KnotVector::new(0.0, 10.0, interior).unwrap();
        for _ in 0..100 {
            let x = r.random_range(0.0..=10.0);
            let s: f64 = bspline_basis(x, &knots).iter().sum();
            assert!((s - 1.0).abs() < 1e-10, "sum {s} at {x} for {knots:?}");
        }
    }
}

#[test]
fn quantile_knot_splines_sum_to_one_on_the_data() {
    let mut r = rng(2);
    let values: Vec<f64> = (0..10_000).map(|_| r.random::<f64>().powi(3) * 50.0).collect();
    let knots = quantile_knots(&values, 4).unwrap();
    for &x in &values {
        let s: f64 = bspline_basis(x, &knots).iter().sum();
        assert!((s - 1.0).abs() < 1e-10);
    }
}

#[test]
fn fourier_pairs_lie_on_the_unit_circle() {
    let mut r = rng(3);
    for _ in 0..10_000 {
        let t = r.random_range(-1e5..1e5);
        let period = r.random_range(1.0..9000.0);
        let z = fourier_terms(t, 3, period);
        for k in 0..3 {
            let v = z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1];
            assert!((v - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn calendar_features_repeat_daily_and_weekly() {
    let start = parse_timestamp("2017-01-01T00:00:00Z").unwrap();
    let hour_block = [0, 3, 6, 7, 8];
    let week_block = [1, 4, 9, 10, 11];
    let mut r = rng(4);
    for _ in 0..10_000 {
        let t = start + Duration::hours(r.random_range(0..3 * 8760));
        let base = tau_row(Calendar::of(t));
        let day = tau_row(Calendar::of(t + Duration::hours(24)));
        let week = tau_row(Calendar::of(t + Duration::hours(168)));
        for &k in &hour_block {
            assert_eq!(base[k], day[k]);
            assert_eq!(base[k], week[k]);
        }
        for &k in &week_block {
            assert_eq!(base[k], week[k]);
        }
    }
}
