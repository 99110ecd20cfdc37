#![allow(dead_code)]

use gridcast::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Matrix {
    let cols: Vec<Vec<f64>> = (0..m).map(|_| normals(rng, n)).collect();
    Matrix::from_columns(&cols)
}

/// `X` with `m` noise columns and `y = Σ coef_k · X[:, k] + noise·ε`, signal in
/// the first `coef.len()` columns.
pub fn planted(rng: &mut ChaCha8Rng, n: usize, m: usize, coef: &[f64], noise: f64) -> (Matrix, Vec<f64>) {
    let x = random_matrix(rng, n, m);
    let y = (0..n)
        .map(|i| {
            let s: f64 = coef.iter().enumerate().map(|(k, c)| c * x.get(i, k)).sum();
            s + noise * normal(rng)
        })
        .collect();
    (x, y)
}

/// Double-double number `hi + lo`.
#[derive(Debug, Clone, Copy)]
pub struct Dd(pub f64, pub f64);

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

impl Dd {
    pub fn from(v: f64) -> Self {
        Dd(v, 0.0)
    }

    pub fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let e = (self.0 - (s - bb)) + (o.0 - bb);
        quick_two_sum(s, e + self.1 + o.1)
    }

    pub fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let e = self.0.mul_add(o.0, -p);
        quick_two_sum(p, e + self.0 * o.1 + self.1 * o.0)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self.add(o.mul(Dd::from(q1)).neg());
        let q2 = r.0 / o.0;
        let r = r.add(o.mul(Dd::from(q2)).neg());
        let q3 = r.0 / o.0;
        quick_two_sum(q1, q2).add(Dd::from(q3))
    }
}

/// Least squares through the normal equations, accumulated and solved in
/// double-double arithmetic with partial pivoting.
pub fn oracle_ols(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let (n, m) = (x.rows(), x.cols());
    let mut a = vec![vec![Dd::from(0.0); m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            let mut s = Dd::from(0.0);
            for r in 0..n {
                s = s.add(Dd::from(x.get(r, i)).mul(Dd::from(x.get(r, j))));
            }
            a[i][j] = s;
        }
        let mut s = Dd::from(0.0);
        for r in 0..n {
            s = s.add(Dd::from(x.get(r, i)).mul(Dd::from(y[r])));
        }
        a[i][m] = s;
    }
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].0.abs().total_cmp(&a[j][k].0.abs())).unwrap();
        a.swap(k, p);
        for i in k + 1..m {
            let f = a[i][k].div(a[k][k]);
            for j in k..=m {
                a[i][j] = a[i][j].add(f.mul(a[k][j]).neg());
            }
        }
    }
    let mut beta = vec![Dd::from(0.0); m];
    for k in (0..m).rev() {
        let mut s = a[k][m];
        for j in k + 1..m {
            s = s.add(a[k][j].mul(beta[j]).neg());
        }
        beta[k] = s.div(a[k][k]);
    }
    beta.iter().map(|b| b.0 + b.1).collect()
}
