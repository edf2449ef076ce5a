//! First and second moments of M = max{X_1, ..., X_ell} for a correlated
//! zero-mean unit-variance Gaussian vector.
//!
//! The mean is an ordered-pair sum of sqrt((1 - rho_ij)/(4 pi)) times an
//! orthant factor of the conditioned difference matrix; the second moment is
//! 1 plus an ordered-triple sum of the kernel [`h`] times an orthant factor.
//! Summation order is lexicographic in the indices so results are
//! bit-reproducible; no compensated summation (at most 121 terms).

use crate::corrmat::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::orthant::orthant_prob;
use crate::partials::{reduced_matrix_one, reduced_matrix_two};

use std::f64::consts::PI;

/// Off-diagonal correlations with 1 - rho at or below this are ties of
/// identical variables and are rejected.
const DEGENERACY_TOL: f64 = 1e-14;

/// How a set of moments was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GeneralAfonja,
    Ar1ClosedForm,
    MonteCarlo,
}

/// E(M), E(M^2), V(M) for one correlation matrix.
///
/// `mean` and `variance` are absent at ell = 6, where only the second moment
/// has an elementary closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentResult {
    pub ell: usize,
    pub mean: Option<f64>,
    pub second_moment: f64,
    pub variance: Option<f64>,
    pub method: Method,
}

/// Kernel of the second-moment triple sum:
/// (1-x)/(4 pi) * (1+x-y-z) / sqrt(4(1-x)(1-y) - (1-x-y+z)^2).
///
/// The radicand is symmetric under every permutation of (x, y, z); the whole
/// kernel is symmetric in y, z only.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negations reject NaN arguments
pub fn h(x: f64, y: f64, z: f64) -> Result<f64> {
    for v in [x, y, z] {
        if !(v.abs() <= 1.0) {
            return Err(Error::OutOfRangeValue { value: v });
        }
    }
    let radicand = 4.0 * (1.0 - x) * (1.0 - y) - (1.0 - x - y + z) * (1.0 - x - y + z);
    if !(radicand > 0.0) {
        return Err(Error::NonpositiveRadicand { radicand });
    }
    Ok((1.0 - x) / (4.0 * PI) * (1.0 + x - y - z) / radicand.sqrt())
}

fn check_ties(r: &CorrelationMatrix) -> Result<()> {
    let ell = r.dim();
    for i in 1..=ell {
        for j in (i + 1)..=ell {
            let value = r.rho(i, j);
            if 1.0 - value <= DEGENERACY_TOL {
                return Err(Error::DegenerateCorrelation { i, j, value });
            }
        }
    }
    Ok(())
}

fn pair_orthant_factor(r: &CorrelationMatrix, ell: usize, i: usize, j: usize) -> Result<f64> {
    let p = match ell {
        2 => orthant_prob(None, 0)?,
        3 => orthant_prob(None, 1)?,
        4 | 5 => {
            let reduced = reduced_matrix_one(r, i, j)?.to_correlation_matrix()?;
            orthant_prob(Some(&reduced), ell - 2)?
        }
        _ => unreachable!("ell validated by caller"),
    };
    Ok(p.value)
}

fn triple_orthant_factor(
    r: &CorrelationMatrix,
    ell: usize,
    i: usize,
    j: usize,
    k: usize,
) -> Result<f64> {
    let p = match ell {
        3 => orthant_prob(None, 0)?,
        4 => orthant_prob(None, 1)?,
        5 | 6 => {
            let reduced = reduced_matrix_two(r, i, j, k)?.to_correlation_matrix()?;
            orthant_prob(Some(&reduced), ell - 3)?
        }
        _ => unreachable!("ell validated by caller"),
    };
    Ok(p.value)
}

/// E(M) together with the number of summands evaluated
/// (ell * (ell - 1) ordered pairs: 2, 6, 12, 20).
pub fn mean_max_with_terms(r: &CorrelationMatrix) -> Result<(f64, usize)> {
    let ell = r.dim();
    if !(2..=5).contains(&ell) {
        return Err(Error::UnsupportedDimension { dim: ell });
    }
    check_ties(r)?;
    let mut total = 0.0;
    let mut terms = 0;
    for i in 1..=ell {
        for j in 1..=ell {
            if j == i {
                continue;
            }
            let weight = ((1.0 - r.rho(i, j)) / (4.0 * PI)).sqrt();
            total += weight * pair_orthant_factor(r, ell, i, j)?;
            terms += 1;
        }
    }
    Ok((total, terms))
}

/// E(M) for 2 <= ell <= 5.
pub fn mean_max(r: &CorrelationMatrix) -> Result<f64> {
    mean_max_with_terms(r).map(|(value, _)| value)
}

/// E(M^2) together with the number of kernel terms evaluated
/// (ell * (ell - 1) * (ell - 2) ordered triples: 0, 6, 24, 60, 120).
pub fn second_moment_max_with_terms(r: &CorrelationMatrix) -> Result<(f64, usize)> {
    let ell = r.dim();
    if !(2..=6).contains(&ell) {
        return Err(Error::UnsupportedDimension { dim: ell });
    }
    check_ties(r)?;
    let mut total = 1.0;
    let mut terms = 0;
    for i in 1..=ell {
        for j in 1..=ell {
            if j == i {
                continue;
            }
            for k in 1..=ell {
                if k == i || k == j {
                    continue;
                }
                let kernel = h(r.rho(i, j), r.rho(i, k), r.rho(j, k))?;
                total += kernel * triple_orthant_factor(r, ell, i, j, k)?;
                terms += 1;
            }
        }
    }
    Ok((total, terms))
}

/// E(M^2) for 2 <= ell <= 6. Exactly 1 at ell = 2.
pub fn second_moment_max(r: &CorrelationMatrix) -> Result<f64> {
    second_moment_max_with_terms(r).map(|(value, _)| value)
}

/// Both moments and the variance, for 2 <= ell <= 5.
pub fn variance_max(r: &CorrelationMatrix) -> Result<MomentResult> {
    let ell = r.dim();
    if !(2..=5).contains(&ell) {
        return Err(Error::UnsupportedDimension { dim: ell });
    }
    let mean = mean_max(r)?;
    let second_moment = second_moment_max(r)?;
    let variance = second_moment - mean * mean;
    debug_assert!(variance >= 0.0, "variance must be nonnegative");
    Ok(MomentResult {
        ell,
        mean: Some(mean),
        second_moment,
        variance: Some(variance),
        method: Method::GeneralAfonja,
    })
}

/// Left-hand side of the summand identity:
/// r_{i,ji} * (r_{i,ki} - r_{i,jk} r_{i,ji}) / (2 pi sqrt(1 - r_{i,jk}^2)),
/// which collapses to h(rho_ij, rho_ik, rho_jk) for distinct i, j, k.
pub fn revision_identity_lhs(
    r: &CorrelationMatrix,
    i: usize,
    j: usize,
    k: usize,
) -> Result<f64> {
    if i == j || i == k || j == k {
        return Err(Error::DuplicateIndex {
            index: if i == j { i } else { k },
        });
    }
    let r_ji = crate::partials::diff_correlation(r, i, j, i)?;
    let r_ki = crate::partials::diff_correlation(r, i, k, i)?;
    let r_jk = crate::partials::diff_correlation(r, i, j, k)?;
    let denom = 1.0 - r_jk * r_jk;
    if denom <= DEGENERACY_TOL {
        return Err(Error::DegenerateConditioning { denominator: denom });
    }
    Ok(r_ji * (r_ki - r_jk * r_ji) / (2.0 * PI * denom.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrmat::{ar1_matrix, Ar1Parameter};

    fn ar1(rho: f64, ell: usize) -> CorrelationMatrix {
        ar1_matrix(Ar1Parameter::new(rho).unwrap(), ell).unwrap()
    }

    fn identity(ell: usize) -> CorrelationMatrix {
        CorrelationMatrix::identity(ell).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (diff {:e})", (a - b).abs());
    }

    #[test]
    fn kernel_at_origin() {
        // 1/(4 pi sqrt(3))
        close(h(0.0, 0.0, 0.0).unwrap(), 0.045_944_074_618_482_67, 1e-16);
    }

    #[test]
    fn kernel_symmetric_in_last_two() {
        for (x, y, z) in [(0.3, -0.2, 0.4), (-0.7, 0.5, -0.1), (0.25, 0.5, 0.25)] {
            close(h(x, y, z).unwrap(), h(x, z, y).unwrap(), 1e-16);
        }
    }

    #[test]
    fn kernel_three_radicand_forms_agree() {
        let rho = 0.5_f64;
        let (x, y, z) = (rho * rho, rho, rho);
        let first = h(x, y, z).unwrap();
        let rad2 = 4.0 * (1.0 - x) * (1.0 - z) - (1.0 - x - z + y).powi(2);
        let second = (1.0 - x) / (4.0 * PI) * (1.0 + x - y - z) / rad2.sqrt();
        let rad3 = (1.0 - x) * (3.0 + x) - y * (2.0 + y) - z * (2.0 + z)
            + 2.0 * (x * y + x * z + y * z);
        let third = (1.0 - x) / (4.0 * PI) * (1.0 + x - y - z) / rad3.sqrt();
        close(first, second, 1e-14);
        close(first, third, 1e-14);
    }

    #[test]
    fn kernel_rejects_degenerate_triples() {
        assert!(matches!(
            h(1.0, 0.3, 0.3),
            Err(Error::NonpositiveRadicand { .. })
        ));
        assert!(matches!(h(1.5, 0.0, 0.0), Err(Error::OutOfRangeValue { .. })));
    }

    #[test]
    fn mean_small_cases() {
        // ell = 2 at independence: 1/sqrt(pi).
        close(
            mean_max(&identity(2)).unwrap(),
            0.564_189_583_547_756_3,
            1e-15,
        );
        // ell = 3 at independence: 3/(2 sqrt(pi)).
        close(
            mean_max(&identity(3)).unwrap(),
            0.846_284_375_321_634_5,
            1e-14,
        );
        // ell = 5 at independence.
        close(
            mean_max(&identity(5)).unwrap(),
            1.1629644736405196,
            1e-12,
        );
    }

    #[test]
    fn mean_matches_ar1_closed_form_at_half() {
        let got = mean_max(&ar1(0.5, 4)).unwrap();
        close(got, crate::ar1::closed_form::mean_m4(0.5), 1e-12);
    }

    #[test]
    fn mean_term_counts() {
        for (ell, expected) in [(2, 2), (3, 6), (4, 12), (5, 20)] {
            let (_, terms) = mean_max_with_terms(&identity(ell)).unwrap();
            assert_eq!(terms, expected);
        }
    }

    #[test]
    fn mean_rejects_ell_6() {
        assert!(matches!(
            mean_max(&identity(6)),
            Err(Error::UnsupportedDimension { dim: 6 })
        ));
    }

    #[test]
    fn second_moment_is_one_at_ell_2() {
        for rho in [-0.9, -0.3, 0.0, 0.4, 0.8] {
            let (value, terms) = second_moment_max_with_terms(&ar1(rho, 2)).unwrap();
            assert_eq!(value, 1.0);
            assert_eq!(terms, 0);
        }
    }

    #[test]
    fn second_moment_small_cases() {
        // ell = 3 at independence: 1 + sqrt(3)/(2 pi).
        close(
            second_moment_max(&identity(3)).unwrap(),
            1.275664447710896,
            1e-14,
        );
        // ell = 6 at independence.
        close(
            second_moment_max(&identity(6)).unwrap(),
            2.021_739_069_357_418,
            1e-12,
        );
    }

    #[test]
    fn second_moment_matches_ar1_closed_form() {
        for rho in [-0.5, 0.0, 0.5] {
            let got = second_moment_max(&ar1(rho, 3)).unwrap();
            close(got, crate::ar1::closed_form::second_m3(rho), 1e-12);
        }
    }

    #[test]
    fn second_moment_term_counts() {
        for (ell, expected) in [(2, 0), (3, 6), (4, 24), (5, 60), (6, 120)] {
            let (_, terms) = second_moment_max_with_terms(&identity(ell)).unwrap();
            assert_eq!(terms, expected);
        }
    }

    #[test]
    fn second_moment_rejects_ell_7() {
        let id7 = CorrelationMatrix::identity(7).unwrap();
        assert!(matches!(
            second_moment_max(&id7),
            Err(Error::UnsupportedDimension { dim: 7 })
        ));
    }

    #[test]
    fn ties_are_rejected() {
        let rows = vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let r = CorrelationMatrix::from_rows(&rows).unwrap();
        assert!(matches!(
            mean_max(&r),
            Err(Error::DegenerateCorrelation { .. })
        ));
        assert!(matches!(
            second_moment_max(&r),
            Err(Error::DegenerateCorrelation { .. })
        ));
    }

    #[test]
    fn variance_at_independence() {
        let res = variance_max(&identity(2)).unwrap();
        assert_eq!(res.method, Method::GeneralAfonja);
        assert_eq!(res.second_moment, 1.0);
        close(res.variance.unwrap(), 0.681_690_113_816_209_4, 1e-15);
    }

    #[test]
    fn revision_identity_at_independence() {
        let lhs = revision_identity_lhs(&identity(4), 1, 2, 3).unwrap();
        close(lhs, h(0.0, 0.0, 0.0).unwrap(), 1e-16);
    }

    #[test]
    fn revision_identity_on_ar1() {
        let r = ar1(0.5, 4);
        let lhs = revision_identity_lhs(&r, 1, 2, 3).unwrap();
        close(lhs, h(r.rho(1, 2), r.rho(1, 3), r.rho(2, 3)).unwrap(), 1e-14);

        let r = ar1(-0.7, 5);
        let lhs = revision_identity_lhs(&r, 2, 5, 3).unwrap();
        close(lhs, h(r.rho(2, 5), r.rho(2, 3), r.rho(5, 3)).unwrap(), 1e-14);
    }

    #[test]
    fn revision_identity_rejects_repeats() {
        let r = ar1(0.5, 4);
        assert!(matches!(
            revision_identity_lhs(&r, 1, 1, 3),
            Err(Error::DuplicateIndex { .. })
        ));
    }
}
