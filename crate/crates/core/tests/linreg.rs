mod common;

use common::{normal, normals, oracle_ols, random_matrix, rng};
use gridcast::linalg::Matrix;
use gridcast::linreg::{fit_ols, fit_with_intercept, with_one};
use rand::Rng;

fn prov(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

#[test]
fn qr_fit_matches_extended_precision_normal_equations() {
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let mut r = rng(10_000 + seed);
        let m = r.random_range(1..=20);
        let n = r.random_range(m + 2..=200);
        let x = random_matrix(&mut r, n, m);
        let beta_true = normals(&mut r, m);
        let y: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|j| x.get(i, j) * beta_true[j]).sum::<f64>() + normal(&mut r))
            .collect();
        let fit = fit_ols(&x, &y, prov(m)).unwrap();
        let oracle = oracle_ols(&x, &y);
        let scale = oracle.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for (a, b) in fit.beta.iter().zip(&oracle) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    assert!(worst < 1e-8, "largest relative deviation {worst:e}");
}

#[test]
fn intervals_cover_new_observations() {
    // 1000 fits, 10 fresh points each
    let (mut inside, mut total) = (0usize, 0usize);
    for seed in 0..1000u64 {
        let mut r = rng(20_000 + seed);
        let (n, m) = (60, 3);
        let x = random_matrix(&mut r, n, m);
        let beta = [1.0, -2.0, 0.5];
        let y: Vec<f64> = (0..n)
            .map(|i| 3.0 + (0..m).map(|j| x.get(i, j) * beta[j]).sum::<f64>() + 1.5 * normal(&mut r))
            .collect();
        let fit = fit_with_intercept(&x, &y, &prov(m)).unwrap();
        for _ in 0..10 {
            let z = normals(&mut r, m);
            let y_new = 3.0 + z.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + 1.5 * normal(&mut r);
            let (lo, hi) = fit.prediction_interval(&with_one(&z), 0.95).unwrap();
            inside += usize::from(lo <= y_new && y_new <= hi);
            total += 1;
        }
    }
    let coverage = inside as f64 / total as f64;
    assert!((0.93..=0.97).contains(&coverage), "coverage {coverage}");
}

#[test]
fn more_columns_than_rows_is_an_error() {
    let x = Matrix::from_columns(&[vec![1.0, 2.0], vec![3.0, 5.0], vec![0.0, 1.0]]);
    assert!(fit_ols(&x, &[1.0, 2.0], prov(3)).is_err());
}
