//! Moments of the maximum of a correlated Gaussian vector.
//!
//! For a zero-mean unit-variance Gaussian vector with correlation matrix R
//! and M = max{X_1, ..., X_ell}, this crate evaluates E(M) in closed form for
//! ell <= 5 and E(M^2) for ell <= 6, via difference correlations, partial
//! correlations of the conditioned differences, and low-dimensional orthant
//! probabilities. The AR(1) family rho_ij = rho^|j-i| gets dedicated helpers:
//! rho sweeps, interior-maximum search, independence limits, and the Gumbel
//! location constant for long segments. A Cholesky-based Monte Carlo oracle
//! and the bivariate quadrant integrals provide independent verification.

pub mod ar1;
pub mod corrmat;
pub mod error;
pub mod moments;
mod num;
pub mod oracle;
pub mod orthant;
pub mod partials;

pub use corrmat::{ar1_matrix, Ar1Parameter, CorrelationMatrix};
pub use error::{Error, Result};
pub use moments::{mean_max, second_moment_max, variance_max, Method, MomentResult};
