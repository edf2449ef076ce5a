//! Validated correlation matrices, including the stationary AR(1) family.
//!
//! A [`CorrelationMatrix`] is symmetric with unit diagonal, entries in
//! [-1, 1], and positive semidefinite within a pivot tolerance. Instances are
//! immutable after construction and safe to share across threads.

use crate::error::{Error, Result};

/// Absolute tolerance for the symmetry check; inputs passing it are averaged.
const SYMMETRY_TOL: f64 = 1e-12;
/// Absolute tolerance on diagonal entries before they are snapped to 1.
const DIAGONAL_TOL: f64 = 1e-12;
/// Slack beyond |1| tolerated in off-diagonal entries before rejection.
const ENTRY_TOL: f64 = 1e-12;
/// Pivot tolerance of the semidefiniteness check, relative to the unit diagonal.
/// Matrices with smallest eigenvalue above -PSD_PIVOT_TOL are accepted.
pub(crate) const PSD_PIVOT_TOL: f64 = 1e-10;

/// Lag-one serial correlation of a stationary AR(1) process, |rho| < 1 strictly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Parameter(f64);

impl Ar1Parameter {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && rho.abs() < 1.0 {
            Ok(Self(rho))
        } else {
            Err(Error::RhoOutOfRange { rho })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Symmetric positive-semidefinite matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    data: Vec<f64>, // row-major
}

impl CorrelationMatrix {
    /// Validate `rows` as a correlation matrix.
    ///
    /// Checks shape, unit diagonal, symmetry (then averages the two halves),
    /// entry range, and positive semidefiniteness within the pivot tolerance.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if dim < 2 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidShape { rows: dim, cols });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            data.extend_from_slice(row);
        }
        validate_in_place(dim, &mut data)?;
        Ok(Self { dim, data })
    }

    /// The identity matrix: independent coordinates.
    pub fn identity(dim: usize) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Parse the plain-text matrix format: first significant line holds the
    /// dimension, followed by that many rows of whitespace-separated entries.
    /// Lines whose first non-blank character is '#' are comments.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut significant = text
            .lines()
            .enumerate()
            .map(|(idx, line)| (idx + 1, line.trim()))
            .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'));

        let (line_no, dim_line) = significant.next().ok_or(Error::ParseMatrix {
            line: 0,
            reason: "empty input".into(),
        })?;
        let dim: usize = dim_line.parse().map_err(|_| Error::ParseMatrix {
            line: line_no,
            reason: format!("expected a dimension, got {dim_line:?}"),
        })?;

        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (line_no, row_line) = significant.next().ok_or(Error::ParseMatrix {
                line: 0,
                reason: format!("expected {dim} rows"),
            })?;
            let row: Vec<f64> = row_line
                .split_whitespace()
                .map(|tok| {
                    tok.parse().map_err(|_| Error::ParseMatrix {
                        line: line_no,
                        reason: format!("bad number {tok:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != dim {
                return Err(Error::ParseMatrix {
                    line: line_no,
                    reason: format!("expected {dim} entries, got {}", row.len()),
                });
            }
            rows.push(row);
        }
        if let Some((line_no, _)) = significant.next() {
            return Err(Error::ParseMatrix {
                line: line_no,
                reason: "trailing content after the matrix".into(),
            });
        }
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Correlation between coordinates `i` and `j` (1-based).
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        assert!(
            (1..=self.dim).contains(&i) && (1..=self.dim).contains(&j),
            "index ({i},{j}) outside 1..={}",
            self.dim
        );
        self.data[(i - 1) * self.dim + (j - 1)]
    }

    /// The entries as rows, for re-validation or permutation in callers.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }
}

/// Correlation matrix of an AR(1) segment: entries rho^|j-i|.
///
/// Positive definite for every |rho| < 1. `ell` is capped at 6, the largest
/// dimension any implemented moment formula consumes.
pub fn ar1_matrix(rho: Ar1Parameter, ell: usize) -> Result<CorrelationMatrix> {
    if !(2..=6).contains(&ell) {
        return Err(Error::EllOutOfRange {
            ell,
            min: 2,
            max: 6,
        });
    }
    let r = rho.value();
    let rows: Vec<Vec<f64>> = (0..ell)
        .map(|i| {
            (0..ell)
                .map(|j| r.powi((j as i32 - i as i32).abs()))
                .collect()
        })
        .collect();
    CorrelationMatrix::from_rows(&rows)
}

// Checks are written as negations so NaN entries fail them.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn validate_in_place(dim: usize, data: &mut [f64]) -> Result<()> {
    for i in 0..dim {
        let d = data[i * dim + i];
        if !((d - 1.0).abs() <= DIAGONAL_TOL) {
            return Err(Error::NonUnitDiagonal {
                index: i + 1,
                value: d,
            });
        }
        data[i * dim + i] = 1.0;
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let a = data[i * dim + j];
            let b = data[j * dim + i];
            if !((a - b).abs() <= SYMMETRY_TOL) {
                return Err(Error::Asymmetric { i: i + 1, j: j + 1 });
            }
            let mut avg = 0.5 * (a + b);
            if !(avg.abs() <= 1.0 + ENTRY_TOL) {
                return Err(Error::OutOfRangeEntry {
                    i: i + 1,
                    j: j + 1,
                    value: avg,
                });
            }
            if avg.abs() > 1.0 {
                avg = avg.signum();
            }
            data[i * dim + j] = avg;
            data[j * dim + i] = avg;
        }
    }
    if !psd_within_tolerance(dim, data) {
        return Err(Error::NotPositiveSemidefinite);
    }
    Ok(())
}

/// Cholesky attempt on A + tol*I: succeeds iff the smallest eigenvalue of A
/// exceeds -tol, which is the acceptance rule for near-singular inputs.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation rejects NaN pivots
fn psd_within_tolerance(dim: usize, data: &[f64]) -> bool {
    let mut a = data.to_vec();
    for i in 0..dim {
        a[i * dim + i] += PSD_PIVOT_TOL;
    }
    let mut l = vec![0.0_f64; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return false;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    true
}
