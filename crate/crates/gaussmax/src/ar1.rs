//! AR(1) specialization: moments along the lag-one correlation parameter,
//! rho sweeps, interior-maximum search, independence limits, and the Gumbel
//! location constant for long segments.

use crate::corrmat::{ar1_matrix, Ar1Parameter};
use crate::error::{Error, Result};
use crate::moments::{mean_max, second_moment_max, Method, MomentResult};

use std::f64::consts::PI;

/// Which moment a sweep or search targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Mean,
    SecondMoment,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Mean => "mean",
            Target::SecondMoment => "second_moment",
        }
    }
}

/// One row of a rho sweep. `mean` and `variance` are empty at ell = 6.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub ell: usize,
    pub mean: Option<f64>,
    pub second_moment: f64,
    pub variance: Option<f64>,
}

/// Location and value of an interior maximum over rho.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerResult {
    pub ell: usize,
    pub target: Target,
    pub rho_star: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Location constant of the Gumbel limit for the maximum of a long segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelLocation {
    pub ell: usize,
    pub a_ell: f64,
}

/// The search domain stops this far inside (-1, 1): the moments degenerate at
/// the endpoints and every known maximum lies well inside.
const DOMAIN_EPS: f64 = 1e-6;
const BRENT_TOL: f64 = 1e-12;
const BRENT_MAX_ITER: usize = 300;
/// Spacing of the final parabolic refinement around the Brent point.
const POLISH_STEP: f64 = 1e-3;

/// Moments of the maximum of an AR(1) segment of length `ell`.
///
/// Builds the AR(1) correlation matrix and delegates to the general-path
/// formulas; at ell = 6 only the second moment is populated. Debug builds
/// cross-check the ell <= 4 results against the printed closed forms.
pub fn moments_ar1(rho: f64, ell: usize) -> Result<MomentResult> {
    let p = Ar1Parameter::new(rho)?;
    if !(2..=6).contains(&ell) {
        return Err(Error::EllOutOfRange {
            ell,
            min: 2,
            max: 6,
        });
    }
    let r = ar1_matrix(p, ell)?;
    let second_moment = second_moment_max(&r)?;
    let (mean, variance) = if ell <= 5 {
        let m = mean_max(&r)?;
        (Some(m), Some(second_moment - m * m))
    } else {
        (None, None)
    };

    #[cfg(debug_assertions)]
    {
        if let Some(m) = mean {
            let cf = match ell {
                2 => Some(closed_form::mean_m2(rho)),
                3 => Some(closed_form::mean_m3(rho)),
                4 => Some(closed_form::mean_m4(rho)),
                _ => None,
            };
            if let Some(cf) = cf {
                debug_assert!((m - cf).abs() <= 1e-10, "mean mismatch at rho={rho} ell={ell}");
            }
        }
        let cf2 = match ell {
            2 => Some(1.0),
            3 => Some(closed_form::second_m3(rho)),
            4 => Some(closed_form::second_m4(rho)),
            _ => None,
        };
        if let Some(cf2) = cf2 {
            debug_assert!(
                (second_moment - cf2).abs() <= 1e-10,
                "second moment mismatch at rho={rho} ell={ell}"
            );
        }
    }

    Ok(MomentResult {
        ell,
        mean,
        second_moment,
        variance,
        method: Method::GeneralAfonja,
    })
}

/// Printed closed forms for the smallest AR(1) segments. They serve as
/// fixtures against the general path, which remains the source of truth.
pub mod closed_form {
    use super::*;

    pub fn mean_m2(rho: f64) -> f64 {
        ((1.0 - rho) / PI).sqrt()
    }

    pub fn mean_m3(rho: f64) -> f64 {
        ((1.0 - rho) / PI).sqrt() + ((1.0 - rho * rho) / (4.0 * PI)).sqrt()
    }

    pub fn mean_m4(rho: f64) -> f64 {
        let a = 3.0 + rho + rho * rho - rho * rho * rho;
        let s = ((3.0 - rho) * a).sqrt();
        let t1 = 0.25 / PI
            * ((1.0 - rho) / PI).sqrt()
            * (PI + 2.0 * (1.0 - 2.0 / (3.0 - rho)).asin());
        let t2 = 0.5 / PI
            * ((1.0 - rho) / PI).sqrt()
            * (PI + 2.0 * ((1.0 + 2.0 * rho - rho * rho) / s).asin());
        let t3 = 0.5 / PI
            * ((1.0 - rho * rho) / PI).sqrt()
            * (PI + 2.0 * ((1.0 - rho) * (1.0 - rho) / s).asin());
        let t4 = 0.25 / PI
            * ((1.0 - rho * rho * rho) / PI).sqrt()
            * (PI + 2.0 * (1.0 - 2.0 / a).asin());
        t1 + t2 + t3 + t4
    }

    pub fn second_m3(rho: f64) -> f64 {
        1.0 + (1.0 - rho) * ((3.0 - rho) * (1.0 + rho)).sqrt() / (2.0 * PI)
    }

    pub fn second_m4(rho: f64) -> f64 {
        let a = 3.0 + rho + rho * rho - rho * rho * rho;
        let s = ((3.0 - rho) * a).sqrt();
        let num = 3.0
            + s
            + rho
                * (1.0 - 2.0 * rho - 2.0 * rho * rho - rho.powi(3) + rho.powi(4) - rho * s);
        1.0 + num / (2.0 * PI * ((1.0 + rho) * a).sqrt())
    }

    /// Closed-form moments for ell <= 4, tagged [`Method::Ar1ClosedForm`].
    pub fn moments(rho: f64, ell: usize) -> Result<MomentResult> {
        Ar1Parameter::new(rho)?;
        let (mean, second_moment) = match ell {
            2 => (mean_m2(rho), 1.0),
            3 => (mean_m3(rho), second_m3(rho)),
            4 => (mean_m4(rho), second_m4(rho)),
            _ => {
                return Err(Error::EllOutOfRange {
                    ell,
                    min: 2,
                    max: 4,
                })
            }
        };
        Ok(MomentResult {
            ell,
            mean: Some(mean),
            second_moment,
            variance: Some(second_moment - mean * mean),
            method: Method::Ar1ClosedForm,
        })
    }
}

/// Rows at rho_min, rho_min + step, ..., up to rho_max, in ascending order.
pub fn sweep(ell: usize, rho_min: f64, rho_max: f64, step: f64) -> Result<Vec<SweepRow>> {
    if !(rho_min.is_finite() && rho_max.is_finite() && step.is_finite())
        || rho_min <= -1.0
        || rho_max >= 1.0
        || rho_min >= rho_max
        || step <= 0.0
    {
        return Err(Error::InvalidGrid);
    }
    let count = ((rho_max - rho_min) / step + 1e-6).floor() as usize + 1;
    let mut rows = Vec::with_capacity(count);
    for t in 0..count {
        let rho = rho_min + t as f64 * step;
        let m = moments_ar1(rho, ell)?;
        rows.push(SweepRow {
            rho,
            ell,
            mean: m.mean,
            second_moment: m.second_moment,
            variance: m.variance,
        });
    }
    Ok(rows)
}

/// Locate the interior maximum of the target moment over rho.
///
/// Derivative-free: Brent-style golden section with parabolic steps on
/// [-1 + 1e-6, 1 - 1e-6], then a parabolic vertex refinement at spacings
/// d and d/2 with Richardson extrapolation of the O(d^2) bias. The
/// refinement recovers the maximizer to ~1e-12 even though function-value
/// comparisons alone flatten out near sqrt(eps).
pub fn maximize(ell: usize, target: Target) -> Result<MaximizerResult> {
    let max_ell = match target {
        Target::Mean => 5,
        Target::SecondMoment => 6,
    };
    if ell == 2 {
        // Monotone mean, constant second moment: nothing interior to find.
        return Err(Error::NoInteriorMaximum { ell });
    }
    if !(3..=max_ell).contains(&ell) {
        return Err(Error::EllOutOfRange {
            ell,
            min: 3,
            max: max_ell,
        });
    }

    let lo = -1.0 + DOMAIN_EPS;
    let hi = 1.0 - DOMAIN_EPS;
    let mut evaluations = 0usize;
    let mut objective = |rho: f64| -> f64 {
        evaluations += 1;
        match moments_ar1(rho, ell) {
            Ok(m) => match target {
                Target::Mean => m.mean.expect("ell <= 5 checked above"),
                Target::SecondMoment => m.second_moment,
            },
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let coarse = {
        let mut negated = |rho: f64| -objective(rho);
        brent_min(&mut negated, lo, hi, BRENT_TOL, BRENT_MAX_ITER).0
    };

    let refined = match parabolic_vertex(&mut objective, coarse, POLISH_STEP) {
        Some(v1) => match parabolic_vertex(&mut objective, v1, POLISH_STEP / 2.0) {
            // vertex(d) carries an O(d^2) bias with the same constant at both
            // spacings; (4*v(d/2) - v(d))/3 cancels it.
            Some(v2) => (4.0 * v2 - v1) / 3.0,
            None => v1,
        },
        None => coarse,
    };
    let rho_star = refined.clamp(lo, hi);
    let value = objective(rho_star);
    if !value.is_finite() {
        return Err(Error::NoInteriorMaximum { ell });
    }
    Ok(MaximizerResult {
        ell,
        target,
        rho_star,
        value,
        evaluations,
    })
}

/// Vertex of the parabola through (c - d, c, c + d). None when the fit is not
/// concave or the vertex lands implausibly far from the center.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation rejects a NaN fit
fn parabolic_vertex<F: FnMut(f64) -> f64>(f: &mut F, center: f64, d: f64) -> Option<f64> {
    let fm = f(center - d);
    let f0 = f(center);
    let fp = f(center + d);
    let den = fm - 2.0 * f0 + fp;
    if !(den < 0.0) {
        return None;
    }
    let vertex = center + 0.5 * d * (fm - fp) / den;
    ((vertex - center).abs() <= 8.0 * d).then_some(vertex)
}

/// Brent scalar minimization: golden-section fallback with parabolic steps.
fn brent_min<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105;
    let eps = f64::EPSILON.sqrt();
    let mut x = a + GOLD * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = 0.0_f64;
    let mut e = 0.0_f64;

    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // Parabolic fit through (v, w, x).
            let r = (x - w) * (fx - fv);
            let q0 = (x - v) * (fx - fw);
            let mut p = (x - v) * q0 - (x - w) * r;
            let mut q = 2.0 * (q0 - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// The printed independence-limit constants, kept separate from the general
/// path so they can serve as fixtures against it.
pub fn independence_limits(ell: usize, target: Target) -> Result<f64> {
    let sqrt_pi = PI.sqrt();
    let sqrt3 = 3.0_f64.sqrt();
    let arcsec3 = (1.0_f64 / 3.0).acos();
    let arcsec4 = 0.25_f64.acos();
    match target {
        Target::Mean => match ell {
            2 => Ok(1.0 / sqrt_pi),
            3 => Ok(1.5 / sqrt_pi),
            4 => Ok(3.0 / sqrt_pi * (1.0 - arcsec3 / PI)),
            5 => Ok(5.0 / sqrt_pi * (1.0 - 1.5 * arcsec3 / PI)),
            _ => Err(Error::EllOutOfRange {
                ell,
                min: 2,
                max: 5,
            }),
        },
        Target::SecondMoment => match ell {
            3 => Ok(1.0 + sqrt3 / (2.0 * PI)),
            4 => Ok(1.0 + sqrt3 / PI),
            5 => Ok(1.0 + 2.5 * sqrt3 / PI * (1.0 - arcsec4 / PI)),
            6 => Ok(1.0 + 5.0 * sqrt3 / PI * (1.0 - 1.5 * arcsec4 / PI)),
            _ => Err(Error::EllOutOfRange {
                ell,
                min: 3,
                max: 6,
            }),
        },
    }
}

/// Location constant of the Gumbel limit:
/// a_ell = sqrt(2 ln ell) - (ln ln ell + ln 4 pi)/(2 sqrt(2 ln ell)).
///
/// It does not depend on the lag-one correlation.
pub fn gumbel_location(ell: usize) -> Result<GumbelLocation> {
    if ell < 2 {
        return Err(Error::EllOutOfRange {
            ell,
            min: 2,
            max: usize::MAX,
        });
    }
    let ln_ell = (ell as f64).ln();
    let root = (2.0 * ln_ell).sqrt();
    let a_ell = root - (ln_ell.ln() + (4.0 * PI).ln()) / (2.0 * root);
    Ok(GumbelLocation { ell, a_ell })
}
