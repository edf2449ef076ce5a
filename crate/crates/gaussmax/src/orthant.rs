//! Closed-form positive-orthant probabilities for dimensions 0 through 3.

use crate::corrmat::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::num::clamp_unit;

use std::f64::consts::PI;

/// Probability that every coordinate of a zero-mean Gaussian vector is >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthantProbability {
    pub value: f64,
    pub dim: usize,
}

/// Orthant probability in closed form.
///
/// Dimensions 0 and 1 take no matrix (pass `None`): the empty product is 1
/// and a single standardized coordinate is nonnegative with probability 1/2.
/// Dimension 2 uses 1/4 + arcsin(r)/(2 pi); dimension 3 uses
/// 1/2 - (arccos r12 + arccos r13 + arccos r23)/(4 pi). Higher dimensions
/// have no elementary closed form and are rejected.
pub fn orthant_prob(matrix: Option<&CorrelationMatrix>, dim: usize) -> Result<OrthantProbability> {
    if dim > 3 {
        return Err(Error::UnsupportedDimension { dim });
    }
    match (dim, matrix) {
        (0 | 1, Some(m)) => Err(Error::DimensionMismatch {
            requested: dim,
            found: m.dim(),
        }),
        (0, None) => Ok(OrthantProbability { value: 1.0, dim }),
        (1, None) => Ok(OrthantProbability { value: 0.5, dim }),
        (_, None) => Err(Error::DimensionMismatch {
            requested: dim,
            found: 0,
        }),
        (2, Some(m)) if m.dim() == 2 => {
            let r = clamp_unit(m.rho(1, 2))?;
            Ok(OrthantProbability {
                value: 0.25 + r.asin() / (2.0 * PI),
                dim,
            })
        }
        (3, Some(m)) if m.dim() == 3 => {
            let r12 = clamp_unit(m.rho(1, 2))?;
            let r13 = clamp_unit(m.rho(1, 3))?;
            let r23 = clamp_unit(m.rho(2, 3))?;
            let value = 0.5 - (r12.acos() + r13.acos() + r23.acos()) / (4.0 * PI);
            Ok(OrthantProbability { value, dim })
        }
        (_, Some(m)) => Err(Error::DimensionMismatch {
            requested: dim,
            found: m.dim(),
        }),
    }
}
