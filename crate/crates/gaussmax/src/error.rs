use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square with at least 2 rows, got {rows}x{cols}")]
    InvalidShape { rows: usize, cols: usize },

    #[error("diagonal entry {index} is {value}, expected 1")]
    NonUnitDiagonal { index: usize, value: f64 },

    #[error("entries ({i},{j}) and ({j},{i}) differ beyond the symmetry tolerance")]
    Asymmetric { i: usize, j: usize },

    #[error("entry ({i},{j}) = {value} lies outside [-1, 1]")]
    OutOfRangeEntry { i: usize, j: usize, value: f64 },

    #[error("matrix is not positive semidefinite within the pivot tolerance")]
    NotPositiveSemidefinite,

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("ell = {ell} outside supported range {min}..={max}")]
    EllOutOfRange { ell: usize, min: usize, max: usize },

    #[error("rho = {rho} outside the open interval (-1, 1)")]
    RhoOutOfRange { rho: f64 },

    #[error("rho({i},{j}) = 1 makes the difference X_{i} - X_{j} degenerate")]
    DegenerateDifference { i: usize, j: usize },

    #[error("conditioning differences are collinear (denominator factor {denominator:e})")]
    DegenerateConditioning { denominator: f64 },

    #[error("correlation ({i},{j}) = {value} is degenerate for the moment formulas")]
    DegenerateCorrelation { i: usize, j: usize, value: f64 },

    #[error("kernel radicand {radicand:e} is not positive")]
    NonpositiveRadicand { radicand: f64 },

    #[error("orthant dimension {dim} unsupported (closed forms cover 0..=3)")]
    UnsupportedDimension { dim: usize },

    #[error("input of dimension {found} does not match requested dimension {requested}")]
    DimensionMismatch { requested: usize, found: usize },

    #[error("value {value} lies outside [-1, 1] beyond the clamp tolerance")]
    OutOfRangeValue { value: f64 },

    #[error("index {index} appears more than once")]
    DuplicateIndex { index: usize },

    #[error("index {index} outside 1..={ell}")]
    IndexOutOfRange { index: usize, ell: usize },

    #[error("no interior maximum for ell={ell}")]
    NoInteriorMaximum { ell: usize },

    #[error("sample count {n} below the minimum {min}")]
    InsufficientSamples { n: usize, min: usize },

    #[error("invalid sweep grid: require -1 < min < max < 1 and step > 0")]
    InvalidGrid,

    #[error("invalid quadrant spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("quadrature failed to reach absolute tolerance {target:e}")]
    QuadratureFailure { target: f64 },

    #[error("matrix file parse error at line {line}: {reason}")]
    ParseMatrix { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
