//! Helpers shared by the integration suites.
#![allow(dead_code)] // each test binary uses its own subset

use gaussmax::corrmat::CorrelationMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} (diff {:e}, tol {tol:e})",
        (a - b).abs()
    );
}

/// Random positive-definite correlation matrix: normalized Gram matrix of
/// uniform vectors with a diagonal boost that keeps conditioning moderate.
pub fn random_corr(dim: usize, rng: &mut ChaCha12Rng) -> CorrelationMatrix {
    loop {
        let a: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut g = vec![0.0_f64; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for k in 0..dim {
                    s += a[i * dim + k] * a[j * dim + k];
                }
                g[i * dim + j] = s;
            }
        }
        let boost = 0.25 * dim as f64 + 0.5;
        for i in 0..dim {
            g[i * dim + i] += boost;
        }
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| g[i * dim + j] / (g[i * dim + i] * g[j * dim + j]).sqrt())
                    .collect()
            })
            .collect();
        if let Ok(m) = CorrelationMatrix::from_rows(&rows) {
            return m;
        }
    }
}

/// Covariance of the differences X_i - X_s and X_i - X_t (s, t != i).
fn diff_cov(r: &CorrelationMatrix, i: usize, s: usize, t: usize) -> f64 {
    let rho_st = if s == t { 1.0 } else { r.rho(s, t) };
    1.0 - r.rho(i, s) - r.rho(i, t) + rho_st
}

/// Residual correlation of (X_i - X_m, X_i - X_n) after projecting out the
/// conditioning differences X_i - X_c, via the exact joint covariance and a
/// Schur complement. Independent of the closed-form route under test.
pub fn conditional_corr_oracle(
    r: &CorrelationMatrix,
    i: usize,
    cond: &[usize],
    m: usize,
    n: usize,
) -> f64 {
    let c = |s: usize, t: usize| diff_cov(r, i, s, t);
    match *cond {
        [j] => {
            let inv = 1.0 / c(j, j);
            let c_mm = c(m, m) - c(m, j) * inv * c(m, j);
            let c_nn = c(n, n) - c(n, j) * inv * c(n, j);
            let c_mn = c(m, n) - c(m, j) * inv * c(n, j);
            c_mn / (c_mm * c_nn).sqrt()
        }
        [j, k] => {
            let (ajj, ajk, akk) = (c(j, j), c(j, k), c(k, k));
            let det = ajj * akk - ajk * ajk;
            // S22^{-1} applied to the cross-covariance rows.
            let solve = |u: (f64, f64)| ((akk * u.0 - ajk * u.1) / det, (ajj * u.1 - ajk * u.0) / det);
            let partial = |s: usize, t: usize| {
                let u = (c(s, j), c(s, k));
                let v = (c(t, j), c(t, k));
                let w = solve(v);
                c(s, t) - u.0 * w.0 - u.1 * w.1
            };
            let c_mm = partial(m, m);
            let c_nn = partial(n, n);
            let c_mn = partial(m, n);
            c_mn / (c_mm * c_nn).sqrt()
        }
        _ => panic!("conditioning sets of size 1 or 2 only"),
    }
}

/// Median of a sample (averaging the middle pair for even counts).
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
