//! Correlations among coordinate differences X_i - X_j and the partial
//! correlations obtained after conditioning on one or two further differences.
//!
//! These are the ingredients of the orthant factors in the moment formulas:
//! for a pivot `i` and removed indices, the remaining differences
//! X_i - X_m, X_i - X_n, ... form a small Gaussian vector whose correlation
//! matrix (after conditioning) is assembled here.
//!
//! All indices in public signatures are 1-based.

use crate::corrmat::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::num::clamp_unit;

/// Denominator factors below this raise [`Error::DegenerateConditioning`];
/// differences with 1 - rho below it are degenerate. Both occur only as
/// |rho| -> 1, outside the open parameter domain.
const DEGENERACY_TOL: f64 = 1e-14;

/// A partial correlation together with its index signature.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrelation {
    /// The correlation value, clamped into [-1, 1].
    pub value: f64,
    /// Pivot index i: every difference in play is X_i minus something.
    pub pivot: usize,
    /// The pair (a, b) whose differences are being correlated.
    pub pair: (usize, usize),
    /// Indices whose differences were conditioned away (0, 1, or 2 of them).
    pub conditioning: Vec<usize>,
}

/// Correlation matrix of the surviving differences: 2x2 or 3x3 with unit
/// diagonal and partial correlations off the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    dim: usize,
    // Off-diagonal entries in the order (1,2), (1,3), (2,3); unused slots 0.
    off: [f64; 3],
}

impl ReducedMatrix {
    fn new2(r12: f64) -> Self {
        Self {
            dim: 2,
            off: [r12, 0.0, 0.0],
        }
    }

    fn new3(r12: f64, r13: f64, r23: f64) -> Self {
        Self {
            dim: 3,
            off: [r12, r13, r23],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at 1-based position (a, b).
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        assert!(
            (1..=self.dim).contains(&a) && (1..=self.dim).contains(&b),
            "index ({a},{b}) outside 1..={}",
            self.dim
        );
        if a == b {
            return 1.0;
        }
        match (a.min(b), a.max(b)) {
            (1, 2) => self.off[0],
            (1, 3) => self.off[1],
            (2, 3) => self.off[2],
            _ => unreachable!(),
        }
    }

    /// Promote to a fully validated [`CorrelationMatrix`].
    pub fn to_correlation_matrix(&self) -> Result<CorrelationMatrix> {
        let rows: Vec<Vec<f64>> = (1..=self.dim)
            .map(|a| (1..=self.dim).map(|b| self.entry(a, b)).collect())
            .collect();
        CorrelationMatrix::from_rows(&rows)
    }
}

fn check_index(ell: usize, index: usize) -> Result<()> {
    if (1..=ell).contains(&index) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, ell })
    }
}

fn check_distinct(indices: &[usize]) -> Result<()> {
    for (pos, &a) in indices.iter().enumerate() {
        if indices[pos + 1..].contains(&a) {
            return Err(Error::DuplicateIndex { index: a });
        }
    }
    Ok(())
}

fn check_nondegenerate_pair(r: &CorrelationMatrix, i: usize, j: usize) -> Result<()> {
    if 1.0 - r.rho(i, j) <= DEGENERACY_TOL {
        Err(Error::DegenerateDifference { i, j })
    } else {
        Ok(())
    }
}

/// Correlation between X_i - X_j and X_i - X_k.
///
/// When j (or k) coincides with the pivot the difference collapses to X_i
/// itself, and the value reduces to sqrt((1 - rho)/2); with both collapsed
/// it is 1.
pub fn diff_correlation(r: &CorrelationMatrix, i: usize, j: usize, k: usize) -> Result<f64> {
    let ell = r.dim();
    check_index(ell, i)?;
    check_index(ell, j)?;
    check_index(ell, k)?;
    if j != i {
        check_nondegenerate_pair(r, i, j)?;
    }
    if k != i {
        check_nondegenerate_pair(r, i, k)?;
    }
    let value = match (j == i, k == i) {
        (true, true) => 1.0,
        (false, true) => ((1.0 - r.rho(i, j)) / 2.0).sqrt(),
        (true, false) => ((1.0 - r.rho(i, k)) / 2.0).sqrt(),
        (false, false) => {
            // Evaluate with (j, k) sorted so the symmetry in j, k holds
            // bit-exactly, not merely up to rounding.
            let (lo, hi) = (j.min(k), j.max(k));
            let num = 1.0 - r.rho(i, lo) - r.rho(i, hi) + r.rho(lo, hi);
            let den = (4.0 * (1.0 - r.rho(i, lo)) * (1.0 - r.rho(i, hi))).sqrt();
            num / den
        }
    };
    clamp_unit(value)
}

/// The sorted complement of `fixed` inside 1..=ell.
pub fn complement_indices(ell: usize, fixed: &[usize]) -> Result<Vec<usize>> {
    for &f in fixed {
        check_index(ell, f)?;
    }
    check_distinct(fixed)?;
    Ok((1..=ell).filter(|t| !fixed.contains(t)).collect())
}

/// Partial correlation of X_i - X_m and X_i - X_n given X_i - X_j.
pub fn partial_corr_one(
    r: &CorrelationMatrix,
    i: usize,
    j: usize,
    m: usize,
    n: usize,
) -> Result<PartialCorrelation> {
    check_distinct(&[i, j, m, n])?;
    // Sorted pair: the value is symmetric in (m, n) and stays bit-identical
    // under a swap.
    let (a, b) = (m.min(n), m.max(n));
    let r_mn = diff_correlation(r, i, a, b)?;
    let r_jm = diff_correlation(r, i, j, a)?;
    let r_jn = diff_correlation(r, i, j, b)?;
    let d1 = 1.0 - r_jm * r_jm;
    let d2 = 1.0 - r_jn * r_jn;
    if d1 <= DEGENERACY_TOL || d2 <= DEGENERACY_TOL {
        return Err(Error::DegenerateConditioning {
            denominator: d1.min(d2),
        });
    }
    let value = clamp_unit((r_mn - r_jm * r_jn) / (d1 * d2).sqrt())?;
    Ok(PartialCorrelation {
        value,
        pivot: i,
        pair: (m, n),
        conditioning: vec![j],
    })
}

/// Partial correlation of X_i - X_m and X_i - X_n given X_i - X_j and X_i - X_k.
pub fn partial_corr_two(
    r: &CorrelationMatrix,
    i: usize,
    j: usize,
    k: usize,
    m: usize,
    n: usize,
) -> Result<PartialCorrelation> {
    check_distinct(&[i, j, k, m, n])?;
    // Sorted pairs: symmetric in (m, n) and in (j, k), bit-identical under
    // either swap.
    let (a, b) = (m.min(n), m.max(n));
    let (c, d) = (j.min(k), j.max(k));
    let r_mn = diff_correlation(r, i, a, b)?;
    let r_jm = diff_correlation(r, i, c, a)?;
    let r_jn = diff_correlation(r, i, c, b)?;
    let r_km = diff_correlation(r, i, d, a)?;
    let r_kn = diff_correlation(r, i, d, b)?;
    let r_jk = diff_correlation(r, i, c, d)?;
    let num = r_mn - r_jm * r_jn - r_km * r_kn
        + r_km * r_jn * r_jk
        + r_jm * r_kn * r_jk
        - r_mn * r_jk * r_jk;
    let d1 = 1.0 - r_jm * r_jm - r_km * r_km + 2.0 * r_jm * r_km * r_jk - r_jk * r_jk;
    let d2 = 1.0 - r_jn * r_jn - r_kn * r_kn + 2.0 * r_jn * r_kn * r_jk - r_jk * r_jk;
    if d1 <= DEGENERACY_TOL || d2 <= DEGENERACY_TOL {
        return Err(Error::DegenerateConditioning {
            denominator: d1.min(d2),
        });
    }
    let value = clamp_unit(num / (d1 * d2).sqrt())?;
    Ok(PartialCorrelation {
        value,
        pivot: i,
        pair: (m, n),
        conditioning: vec![j, k],
    })
}

/// Correlation matrix of the differences left after removing {i, j},
/// conditioned on X_i - X_j: 2x2 at ell = 4, 3x3 at ell = 5.
pub fn reduced_matrix_one(r: &CorrelationMatrix, i: usize, j: usize) -> Result<ReducedMatrix> {
    let ell = r.dim();
    if !(4..=5).contains(&ell) {
        return Err(Error::UnsupportedDimension { dim: ell });
    }
    check_index(ell, i)?;
    check_index(ell, j)?;
    check_distinct(&[i, j])?;
    let comp = complement_indices(ell, &[i, j])?;
    if ell == 4 {
        let r12 = partial_corr_one(r, i, j, comp[0], comp[1])?.value;
        Ok(ReducedMatrix::new2(r12))
    } else {
        let r12 = partial_corr_one(r, i, j, comp[0], comp[1])?.value;
        let r13 = partial_corr_one(r, i, j, comp[0], comp[2])?.value;
        let r23 = partial_corr_one(r, i, j, comp[1], comp[2])?.value;
        Ok(ReducedMatrix::new3(r12, r13, r23))
    }
}

/// Correlation matrix of the differences left after removing {i, j, k},
/// conditioned on both X_i - X_j and X_i - X_k: 2x2 at ell = 5, 3x3 at ell = 6.
pub fn reduced_matrix_two(
    r: &CorrelationMatrix,
    i: usize,
    j: usize,
    k: usize,
) -> Result<ReducedMatrix> {
    let ell = r.dim();
    if !(5..=6).contains(&ell) {
        return Err(Error::UnsupportedDimension { dim: ell });
    }
    check_index(ell, i)?;
    check_index(ell, j)?;
    check_index(ell, k)?;
    check_distinct(&[i, j, k])?;
    let comp = complement_indices(ell, &[i, j, k])?;
    if ell == 5 {
        let r12 = partial_corr_two(r, i, j, k, comp[0], comp[1])?.value;
        Ok(ReducedMatrix::new2(r12))
    } else {
        let r12 = partial_corr_two(r, i, j, k, comp[0], comp[1])?.value;
        let r13 = partial_corr_two(r, i, j, k, comp[0], comp[2])?.value;
        let r23 = partial_corr_two(r, i, j, k, comp[1], comp[2])?.value;
        Ok(ReducedMatrix::new3(r12, r13, r23))
    }
}
