//! Cross-checks of the closed-form machinery against independent routes:
//! Schur-complement residual correlations, Monte Carlo moments and orthant
//! frequencies, and the difference-vector sampling identities.

mod common;

use common::{assert_close, conditional_corr_oracle, random_corr, rng};
use gaussmax::corrmat::{ar1_matrix, Ar1Parameter, CorrelationMatrix};
use gaussmax::moments::variance_max;
use gaussmax::oracle::{cholesky, mc_orthant, sample_max_moments};
use gaussmax::orthant::orthant_prob;
use gaussmax::partials::{partial_corr_one, partial_corr_two};
use rand_distr::{Distribution, StandardNormal};

use std::f64::consts::PI;

fn ar1(rho: f64, ell: usize) -> CorrelationMatrix {
    ar1_matrix(Ar1Parameter::new(rho).unwrap(), ell).unwrap()
}

#[test]
fn partial_one_matches_residual_correlation_on_ar1() {
    let r = ar1(0.5, 4);
    let got = partial_corr_one(&r, 1, 2, 3, 4).unwrap().value;
    let want = conditional_corr_oracle(&r, 1, &[2], 3, 4);
    assert!(got.abs() <= 1.0);
    assert_close(got, want, 1e-6, "partial vs residual oracle");
}

#[test]
fn partial_two_matches_residual_correlation_on_ar1() {
    let r = ar1(0.5, 5);
    let got = partial_corr_two(&r, 1, 2, 3, 4, 5).unwrap().value;
    let want = conditional_corr_oracle(&r, 1, &[2, 3], 4, 5);
    assert_close(got, want, 1e-6, "partial vs residual oracle");
}

#[test]
fn partials_match_residual_correlations_on_random_matrices() {
    let mut rng = rng(0xC0FFEE);
    for _ in 0..40 {
        for dim in 4..=6 {
            let r = random_corr(dim, &mut rng);
            // Single conditioning difference over every (pivot, removed) pair.
            for i in 1..=dim {
                for j in 1..=dim {
                    if j == i {
                        continue;
                    }
                    let rest: Vec<usize> = (1..=dim).filter(|t| *t != i && *t != j).collect();
                    for a in 0..rest.len() {
                        for b in (a + 1)..rest.len() {
                            let got = partial_corr_one(&r, i, j, rest[a], rest[b]).unwrap().value;
                            let want = conditional_corr_oracle(&r, i, &[j], rest[a], rest[b]);
                            assert_close(got, want, 1e-9, "one conditioning difference");
                        }
                    }
                }
            }
            // Two conditioning differences where the dimension allows.
            if dim >= 5 {
                for i in 1..=dim {
                    for j in 1..=dim {
                        for k in 1..=dim {
                            if i == j || i == k || j >= k {
                                continue;
                            }
                            let rest: Vec<usize> =
                                (1..=dim).filter(|t| ![i, j, k].contains(t)).collect();
                            let got = partial_corr_two(&r, i, j, k, rest[0], rest[1])
                                .unwrap()
                                .value;
                            let want = conditional_corr_oracle(&r, i, &[j, k], rest[0], rest[1]);
                            assert_close(got, want, 1e-9, "two conditioning differences");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn bivariate_orthant_matches_monte_carlo() {
    let r = CorrelationMatrix::from_rows(&[vec![1.0, 1.0 / 3.0], vec![1.0 / 3.0, 1.0]]).unwrap();
    let exact = orthant_prob(Some(&r), 2).unwrap().value;
    assert_close(exact, 0.304_086_723_984_696_4, 1e-15, "closed form");
    let n = 10_000_000;
    let estimate = mc_orthant(&r, n, 2024).unwrap();
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!(
        (estimate - exact).abs() <= 3.0 * se,
        "orthant MC {estimate} vs {exact} (3se {:e})",
        3.0 * se
    );
}

#[test]
fn trivariate_orthant_matches_monte_carlo_on_random_matrices() {
    let mut rng = rng(0xBEEF);
    for _ in 0..4 {
        let r = random_corr(3, &mut rng);
        let exact = orthant_prob(Some(&r), 3).unwrap().value;
        let n = 1_000_000;
        let estimate = mc_orthant(&r, n, 77).unwrap();
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (estimate - exact).abs() <= 3.0 * se,
            "orthant MC {estimate} vs {exact}"
        );
    }
}

#[test]
fn moments_match_monte_carlo_on_random_matrices() {
    let mut rng = rng(0x5EED_u64);
    let n = 200_000;
    for ell in 2..=6usize {
        for rep in 0..20u64 {
            let r = random_corr(ell, &mut rng);
            let seed = 1_000 * ell as u64 + rep;
            let est = sample_max_moments(&r, n, seed).unwrap();
            let second = gaussmax::moments::second_moment_max(&r).unwrap();
            let z2 = (est.second_moment - second) / est.se_second;
            assert!(
                z2.abs() <= 3.0,
                "second moment z = {z2} at ell={ell} rep={rep}"
            );
            if ell <= 5 {
                let analytic = variance_max(&r).unwrap();
                let zm = (est.mean - analytic.mean.unwrap()) / est.se_mean;
                let zv = (est.variance - analytic.variance.unwrap()) / est.se_variance;
                assert!(zm.abs() <= 3.0, "mean z = {zm} at ell={ell} rep={rep}");
                assert!(zv.abs() <= 3.0, "variance z = {zv} at ell={ell} rep={rep}");
            }
        }
    }
}

/// Sampling the difference vector reproduces the absolute-moment identities
/// that tie E(M_3) to the two difference scales.
#[test]
fn difference_absolute_moments_match_sampler() {
    let mut seeder = rng(0xD1FF);
    for _ in 0..3 {
        let r = random_corr(3, &mut seeder);
        let (rho12, rho23) = (r.rho(1, 2), r.rho(2, 3));
        let want_y = ((1.0 - rho12) / (4.0 * PI)).sqrt();
        let want_z = ((1.0 - rho23) / (4.0 * PI)).sqrt();

        let l = cholesky(&r).unwrap();
        let n = 400_000usize;
        let mut sampler = rng(0xAB5);
        let (mut sy, mut syy, mut sz, mut szz) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let z1: f64 = StandardNormal.sample(&mut sampler);
            let z2: f64 = StandardNormal.sample(&mut sampler);
            let z3: f64 = StandardNormal.sample(&mut sampler);
            let x1 = l.entry(1, 1) * z1;
            let x2 = l.entry(2, 1) * z1 + l.entry(2, 2) * z2;
            let x3 = l.entry(3, 1) * z1 + l.entry(3, 2) * z2 + l.entry(3, 3) * z3;
            let y = 0.25 * (x1 - x2).abs();
            let z = 0.25 * (x3 - x2).abs();
            sy += y;
            syy += y * y;
            sz += z;
            szz += z * z;
        }
        let nf = n as f64;
        let (my, mz) = (sy / nf, sz / nf);
        let se_y = ((syy / nf - my * my).max(0.0) / nf).sqrt();
        let se_z = ((szz / nf - mz * mz).max(0.0) / nf).sqrt();
        assert!(
            (my - want_y).abs() <= 3.0 * se_y,
            "E|Y|/4: {my} vs {want_y}"
        );
        assert!(
            (mz - want_z).abs() <= 3.0 * se_z,
            "E|Z|/4: {mz} vs {want_z}"
        );
    }
}
