//! Independent verification tools: Cholesky-based Monte Carlo for moments and
//! orthant probabilities, direct AR(1) path simulation, and the bivariate
//! quadrant integrals in closed form and by numerical quadrature.
//!
//! # Randomness and determinism
//!
//! The generator is ChaCha12 (`rand_chacha` 0.3, a counter-based stream
//! cipher with platform-independent output); normal variates come from
//! `rand_distr::StandardNormal` (ziggurat). Work is split into chunks of
//! 2^16 draws; chunk `c` uses the seed `splitmix64(seed + (c+1) * GOLDEN)`
//! and partial sums are merged in chunk order. Sampling here is sequential,
//! so fixed `(seed, n)` always reproduces bit-identical estimates; the
//! chunked scheme keeps any future parallel merge identical up to the fixed
//! reduction order.

use crate::corrmat::{Ar1Parameter, CorrelationMatrix};
use crate::error::{Error, Result};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use std::f64::consts::PI;

/// Minimum Monte Carlo sample count accepted by the estimators.
pub const MC_MIN_SAMPLES: usize = 10_000;
/// Samples (or paths) per RNG chunk.
const CHUNK: usize = 1 << 16;
/// Cholesky pivots at or below this abort the factorization.
const PIVOT_FLOOR: f64 = 1e-13;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix64(seed ^ (chunk + 1).wrapping_mul(GOLDEN)))
}

/// Lower-triangular Cholesky factor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at 1-based (i, j); zero above the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(
            (1..=self.dim).contains(&i) && (1..=self.dim).contains(&j),
            "index ({i},{j}) outside 1..={}",
            self.dim
        );
        if j > i {
            0.0
        } else {
            self.data[(i - 1) * self.dim + (j - 1)]
        }
    }

    /// out = L * z, for one standard-normal vector z.
    fn correlate(&self, z: &[f64], out: &mut [f64]) {
        for (i, out_i) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..i * self.dim + i + 1];
            let mut acc = 0.0;
            for (l, zv) in row.iter().zip(z.iter()) {
                acc += l * zv;
            }
            *out_i = acc;
        }
    }
}

/// Cholesky factor L with L * L^T = R.
///
/// Aborts with [`Error::NotPositiveDefinite`] before any negative square root
/// can occur, so it never returns NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation rejects NaN pivots
pub fn cholesky(r: &CorrelationMatrix) -> Result<LowerTriangular> {
    let dim = r.dim();
    let mut data = vec![0.0_f64; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = r.rho(i + 1, j + 1);
            for k in 0..j {
                s -= data[i * dim + k] * data[j * dim + k];
            }
            if i == j {
                if !(s > PIVOT_FLOOR) {
                    return Err(Error::NotPositiveDefinite {
                        row: i + 1,
                        pivot: s,
                    });
                }
                data[i * dim + i] = s.sqrt();
            } else {
                data[i * dim + j] = s / data[j * dim + j];
            }
        }
    }
    Ok(LowerTriangular { dim, data })
}

/// Monte Carlo estimate of the moments of M = max{X_1, ..., X_ell}.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_second: f64,
    /// Delta-method standard error of `variance` (needs the third and fourth
    /// sample moments, accumulated alongside the first two).
    pub se_variance: f64,
}

/// Sample moments of the maximum under correlation matrix `r`.
pub fn sample_max_moments(r: &CorrelationMatrix, n: usize, seed: u64) -> Result<McEstimate> {
    if n < MC_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            n,
            min: MC_MIN_SAMPLES,
        });
    }
    let l = cholesky(r)?;
    let dim = r.dim();
    let mut z = vec![0.0_f64; dim];
    let mut x = vec![0.0_f64; dim];
    let (mut s1, mut s2, mut s3, mut s4) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);

    let mut remaining = n;
    let mut chunk = 0u64;
    while remaining > 0 {
        let size = remaining.min(CHUNK);
        let mut rng = chunk_rng(seed, chunk);
        let (mut c1, mut c2, mut c3, mut c4) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for _ in 0..size {
            for zv in z.iter_mut() {
                *zv = StandardNormal.sample(&mut rng);
            }
            l.correlate(&z, &mut x);
            let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let m2 = m * m;
            c1 += m;
            c2 += m2;
            c3 += m2 * m;
            c4 += m2 * m2;
        }
        s1 += c1;
        s2 += c2;
        s3 += c3;
        s4 += c4;
        remaining -= size;
        chunk += 1;
    }

    let nf = n as f64;
    let m1 = s1 / nf;
    let m2 = s2 / nf;
    let m3 = s3 / nf;
    let m4 = s4 / nf;
    let var_m = (m2 - m1 * m1).max(0.0);
    let var_m2 = (m4 - m2 * m2).max(0.0);
    let cov_m_m2 = m3 - m1 * m2;
    // Unbiased sample variances for the standard errors of the two means.
    let bessel = nf / (nf - 1.0);
    let se_mean = (var_m * bessel / nf).sqrt();
    let se_second = (var_m2 * bessel / nf).sqrt();
    // Delta method for V = m2 - m1^2: gradient (-2 m1, 1).
    let var_v = (var_m2 - 4.0 * m1 * cov_m_m2 + 4.0 * m1 * m1 * var_m).max(0.0);
    let se_variance = (var_v / nf).sqrt();

    Ok(McEstimate {
        samples: n,
        seed,
        mean: m1,
        second_moment: m2,
        variance: m2 - m1 * m1,
        se_mean,
        se_second,
        se_variance,
    })
}

/// Fraction of sampled vectors with every coordinate >= 0.
pub fn mc_orthant(r: &CorrelationMatrix, n: usize, seed: u64) -> Result<f64> {
    if n < MC_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            n,
            min: MC_MIN_SAMPLES,
        });
    }
    let dim = r.dim();
    if dim > 6 {
        return Err(Error::UnsupportedDimension { dim });
    }
    let l = cholesky(r)?;
    let mut z = vec![0.0_f64; dim];
    let mut x = vec![0.0_f64; dim];
    let mut hits = 0u64;

    let mut remaining = n;
    let mut chunk = 0u64;
    while remaining > 0 {
        let size = remaining.min(CHUNK);
        let mut rng = chunk_rng(seed, chunk);
        for _ in 0..size {
            for zv in z.iter_mut() {
                *zv = StandardNormal.sample(&mut rng);
            }
            l.correlate(&z, &mut x);
            if x.iter().all(|&v| v >= 0.0) {
                hits += 1;
            }
        }
        remaining -= size;
        chunk += 1;
    }
    Ok(hits as f64 / n as f64)
}

/// Maxima of simulated stationary AR(1) segments of length `ell`.
///
/// Paths follow X_1 ~ N(0,1), X_t = rho X_{t-1} + sqrt(1 - rho^2) eps_t, so
/// any segment length is available (the matrix-based samplers stop at 6).
pub fn ar1_path_maxima(rho: Ar1Parameter, ell: usize, paths: usize, seed: u64) -> Vec<f64> {
    let r = rho.value();
    let innovation = (1.0 - r * r).sqrt();
    let mut maxima = Vec::with_capacity(paths);

    let mut remaining = paths;
    let mut chunk = 0u64;
    while remaining > 0 {
        let size = remaining.min(CHUNK);
        let mut rng = chunk_rng(seed, chunk);
        for _ in 0..size {
            let mut x: f64 = StandardNormal.sample(&mut rng);
            let mut m = x;
            for _ in 1..ell {
                let eps: f64 = StandardNormal.sample(&mut rng);
                x = r * x + innovation * eps;
                m = m.max(x);
            }
            maxima.push(m);
        }
        remaining -= size;
        chunk += 1;
    }
    maxima
}

/// Sign quadrant of the bivariate vector (Y, Z); first letter is the sign of Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    PP,
    NP,
    PN,
    NN,
}

/// Zero-mean bivariate normal (Y, Z) with standard deviations sigma_y,
/// sigma_z and correlation xi, restricted to one sign quadrant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantSpec {
    sigma_y: f64,
    sigma_z: f64,
    xi: f64,
    quadrant: Quadrant,
}

impl QuadrantSpec {
    pub fn new(sigma_y: f64, sigma_z: f64, xi: f64, quadrant: Quadrant) -> Result<Self> {
        if !(sigma_y.is_finite() && sigma_y > 0.0) || !(sigma_z.is_finite() && sigma_z > 0.0) {
            return Err(Error::InvalidSpec {
                reason: format!("standard deviations must be positive, got ({sigma_y}, {sigma_z})"),
            });
        }
        if !(xi.is_finite() && xi.abs() < 1.0) {
            return Err(Error::InvalidSpec {
                reason: format!("correlation xi = {xi} must lie in (-1, 1)"),
            });
        }
        Ok(Self {
            sigma_y,
            sigma_z,
            xi,
            quadrant,
        })
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn sigma_z(&self) -> f64 {
        self.sigma_z
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn quadrant(&self) -> Quadrant {
        self.quadrant
    }
}

/// Difference-vector parameters (sigma_y, sigma_z, xi) for Y = X_1 - X_2 and
/// Z = X_3 - X_2 under a standardized trivariate law with the given
/// correlations.
pub fn difference_sigma_xi(rho12: f64, rho13: f64, rho23: f64) -> Result<(f64, f64, f64)> {
    let var_y = 2.0 - 2.0 * rho12;
    let var_z = 2.0 - 2.0 * rho23;
    if var_y <= 0.0 || var_z <= 0.0 {
        return Err(Error::InvalidSpec {
            reason: "difference variance vanishes (rho = 1)".into(),
        });
    }
    let sigma_y = var_y.sqrt();
    let sigma_z = var_z.sqrt();
    let xi = (rho13 - rho12 - rho23 + 1.0) / (sigma_y * sigma_z);
    Ok((sigma_y, sigma_z, xi))
}

/// Closed-form value of the quadrant contribution to E|(Y+|Y|) - (Z+|Z|)|.
pub fn quadrant_integral(spec: &QuadrantSpec) -> f64 {
    let sqrt_2pi = (2.0 * PI).sqrt();
    let (sy, sz, xi) = (spec.sigma_y, spec.sigma_z, spec.xi);
    match spec.quadrant {
        Quadrant::PP => {
            let cross = (sy * sy - 2.0 * xi * sy * sz + sz * sz).sqrt();
            (-(1.0 - xi) * (sy + sz) + 2.0 * cross) / sqrt_2pi
        }
        Quadrant::NP => (1.0 - xi) * sz / sqrt_2pi,
        Quadrant::PN => (1.0 - xi) * sy / sqrt_2pi,
        Quadrant::NN => 0.0,
    }
}

/// Integration domains stop at this many standard deviations; the Gaussian
/// tail beyond is far below the quadrature target.
const TRUNCATION_SIGMAS: f64 = 10.0;
const OUTER_TOL: f64 = 3e-9;
const INNER_TOL: f64 = 1e-13;
/// Per-subinterval tolerances stop halving here. The outer floor sits well
/// above the noise the inner integrals leave on the outer integrand, the
/// inner floor above f64 rounding, otherwise the recursion can never satisfy
/// its local test and exhausts the depth budget.
const OUTER_TOL_FLOOR: f64 = 2e-12;
const INNER_TOL_FLOOR: f64 = 5e-14;
const MAX_DEPTH: u32 = 48;

/// The same quadrant contribution by direct 2-D quadrature of the bivariate
/// density, nested adaptive Simpson with the inner integral split at the
/// |y - z| kink. Independent of [`quadrant_integral`].
pub fn quadrant_integral_numeric(spec: &QuadrantSpec) -> Result<f64> {
    let (sy, sz, xi) = (spec.sigma_y, spec.sigma_z, spec.xi);
    let norm = 1.0 / (2.0 * PI * (1.0 - xi * xi).sqrt() * sy * sz);
    let q = 1.0 / (2.0 * (1.0 - xi * xi));
    let density = move |y: f64, z: f64| {
        let u = y / sy;
        let v = z / sz;
        norm * (-q * (u * u - 2.0 * xi * u * v + v * v)).exp()
    };
    let y_max = TRUNCATION_SIGMAS * sy;
    let z_max = TRUNCATION_SIGMAS * sz;

    let mut inner_error = None;
    let mut result = match spec.quadrant {
        Quadrant::NN => Ok(0.0),
        Quadrant::NP => {
            // z > 0, y < 0, integrand 2 z f(y, z).
            let mut outer = |z: f64| {
                let mut f = |y: f64| density(y, z);
                match adaptive_simpson(&mut f, -y_max, 0.0, INNER_TOL, INNER_TOL_FLOOR) {
                    Ok(v) => 2.0 * z * v,
                    Err(e) => {
                        inner_error = Some(e);
                        0.0
                    }
                }
            };
            adaptive_simpson(&mut outer, 0.0, z_max, OUTER_TOL, OUTER_TOL_FLOOR)
        }
        Quadrant::PN => {
            // y > 0, z < 0, integrand 2 y f(y, z).
            let mut outer = |z: f64| {
                let mut f = |y: f64| 2.0 * y * density(y, z);
                match adaptive_simpson(&mut f, 0.0, y_max, INNER_TOL, INNER_TOL_FLOOR) {
                    Ok(v) => v,
                    Err(e) => {
                        inner_error = Some(e);
                        0.0
                    }
                }
            };
            adaptive_simpson(&mut outer, -z_max, 0.0, OUTER_TOL, OUTER_TOL_FLOOR)
        }
        Quadrant::PP => {
            // y > 0, z > 0, integrand 2 |y - z| f(y, z); kink at y = z.
            let mut outer = |z: f64| {
                let split = z.min(y_max);
                let mut low = |y: f64| 2.0 * (z - y) * density(y, z);
                let mut high = |y: f64| 2.0 * (y - z) * density(y, z);
                let first = adaptive_simpson(&mut low, 0.0, split, INNER_TOL, INNER_TOL_FLOOR);
                let second = if split < y_max {
                    adaptive_simpson(&mut high, split, y_max, INNER_TOL, INNER_TOL_FLOOR)
                } else {
                    Ok(0.0)
                };
                match (first, second) {
                    (Ok(a), Ok(b)) => a + b,
                    (Err(e), _) | (_, Err(e)) => {
                        inner_error = Some(e);
                        0.0
                    }
                }
            };
            adaptive_simpson(&mut outer, 0.0, z_max, OUTER_TOL, OUTER_TOL_FLOOR)
        }
    };
    if let Some(e) = inner_error {
        result = Err(e);
    }
    result
}

/// Adaptive Simpson with Richardson correction; errors out when the depth
/// budget is exhausted before the tolerance is met.
fn adaptive_simpson<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    tol_floor: f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, tol_floor, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    tol_floor: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { target: tol });
    }
    let half = (0.5 * tol).max(tol_floor);
    Ok(simpson_step(f, a, m, fa, flm, fm, left, half, tol_floor, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, half, tol_floor, depth - 1)?)
}
