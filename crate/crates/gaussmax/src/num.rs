//! Small numeric helpers shared across modules.

use crate::error::{Error, Result};

/// Absolute slack allowed when clamping a computed correlation back into [-1, 1].
pub(crate) const CLAMP_TOL: f64 = 1e-12;

/// Clamp floating-point noise back into [-1, 1]; anything further out is an error.
///
/// NaN is rejected (it fails every comparison below and falls through to the error).
pub(crate) fn clamp_unit(value: f64) -> Result<f64> {
    if value.abs() <= 1.0 {
        Ok(value)
    } else if value.abs() <= 1.0 + CLAMP_TOL {
        Ok(value.signum())
    } else {
        Err(Error::OutOfRangeValue { value })
    }
}
