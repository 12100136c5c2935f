//! Search for `λ` making `exp(λu)` convex at a point.
//!
//! `D²{exp(λu)} = λ e^{λu} (D²u + λ Du Duᵀ)`, so the question is when the
//! bracket is positive semidefinite. The search is a doubling bracket
//! followed by bisection on the smallest eigenvalue.
//!
//! For this `u` the bracket is never semidefinite: `u` is constant along
//! rays, so `pᵀ(D²u + λ Du Duᵀ)p = 0` while `(D²u + λ Du Duᵀ)p = −Du ≠ 0`.
//! The smallest eigenvalue tends to zero from below like `1/λ`, and the
//! strictness check at `1.01·λ` is what rejects the tolerance-level crossing.

use serde::{Deserialize, Serialize};

use crate::eigen::min_eigenvalue;
use crate::error::{Error, Result};
use crate::field::{eval_u, grad_u, hess_u, Alpha, PointE, Sym3};
use crate::sampling::Sampler;

/// Upper end of the doubling bracket.
pub const LAMBDA_CAP: f64 = 1e12;
/// PSD means `min eigenvalue ≥ −PSD_TOL·‖M‖_F`.
pub const PSD_TOL: f64 = 1e-12;
/// PSD tolerance used at neighbouring points.
pub const NEIGHBOR_PSD_TOL: f64 = 1e-10;
/// Strictness is verified at `STRICT_FACTOR·λ_min`, and means
/// `min eigenvalue > PSD_TOL·‖M‖_F`, i.e. positive beyond the resolution of
/// the PSD test itself.
pub const STRICT_FACTOR: f64 = 1.01;
/// Relative radii reported by [`neighborhood_check`].
pub const RADII: [f64; 4] = [0.005, 0.01, 0.02, 0.05];

pub fn convexification_matrix(p: &PointE, a: Alpha, lambda: f64) -> Result<Sym3> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Precondition(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let g = grad_u(p, a)?;
    Ok(hess_u(p, a)? + Sym3::outer(&g).scale(lambda))
}

/// The positive factor `λ e^{λu}` dropped from `D²{exp(λu)}`.
pub fn convexification_factor(p: &PointE, a: Alpha, lambda: f64) -> Result<f64> {
    let f = lambda * (lambda * eval_u(p, a)?).exp();
    if f.is_finite() {
        Ok(f)
    } else {
        Err(Error::Overflow {
            what: "lambda exp(lambda u)",
        })
    }
}

pub fn is_psd(m: &Sym3, tol: f64) -> bool {
    min_eigenvalue(m) >= -tol * m.frobenius_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    pub point: PointE,
    pub alpha: Alpha,
    pub lambda_min: f64,
    /// smallest eigenvalue of `D²u + λ Du Duᵀ` at `1.01·lambda_min`
    pub margin: f64,
    /// largest relative radius known to pass; 0 until measured
    pub radius: f64,
    /// final bisection width relative to `lambda_min`
    pub width: f64,
}

/// Requires `α > 1`.
pub fn min_convexifying_lambda(p: &PointE, a: Alpha, tol: f64) -> Result<LambdaResult> {
    if a.value() <= 1.0 {
        return Err(Error::Precondition(format!(
            "convexification search needs alpha > 1, got {a}"
        )));
    }
    min_convexifying_lambda_unguarded(p, a, tol)
}

/// [`min_convexifying_lambda`] without the `α > 1` guard, for negative
/// controls.
pub fn min_convexifying_lambda_unguarded(p: &PointE, a: Alpha, tol: f64) -> Result<LambdaResult> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Precondition(format!(
            "bisection tolerance {tol} not in (0, 1)"
        )));
    }
    let psd_at = |lambda: f64| -> Result<bool> {
        Ok(is_psd(&convexification_matrix(p, a, lambda)?, PSD_TOL))
    };

    let (mut lo, mut hi) = (0.0, 0.0);
    if !psd_at(0.0)? {
        hi = 1.0;
        while !psd_at(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA_CAP {
                let m = convexification_matrix(p, a, LAMBDA_CAP)?;
                return Err(Error::NotConvexifiable {
                    reason: format!(
                        "D²u + λ Du Duᵀ is not PSD up to λ = {LAMBDA_CAP:e} (min eigenvalue {:e}, ‖M‖_F {:e})",
                        min_eigenvalue(&m),
                        m.frobenius_norm()
                    ),
                });
            }
        }
        while hi - lo > tol * hi {
            let mid = 0.5 * (lo + hi);
            if psd_at(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let lambda_min = hi;
    let strict = STRICT_FACTOR * lambda_min;
    let m = convexification_matrix(p, a, strict)?;
    let margin = min_eigenvalue(&m);
    if margin <= PSD_TOL * m.frobenius_norm() {
        return Err(Error::NotConvexifiable {
            reason: format!(
                "PSD only within rounding at λ ≈ {lambda_min:e}; min eigenvalue at {STRICT_FACTOR}·λ is {margin:e}"
            ),
        });
    }
    Ok(LambdaResult {
        point: *p,
        alpha: a,
        lambda_min,
        margin,
        radius: 0.0,
        width: if lambda_min > 0.0 {
            (hi - lo) / lambda_min
        } else {
            0.0
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodOutcome {
    pub radius: f64,
    pub samples: usize,
    pub passed: bool,
    /// worst `min eigenvalue / ‖M‖_F` seen at this radius
    pub worst_relative_eigenvalue: f64,
    /// largest radius in [`RADII`] that passes, 0 if none
    pub largest_passing_radius: f64,
}

fn radius_passes(r: &LambdaResult, radius: f64, samples: usize, seed: u64) -> Result<(bool, f64)> {
    let lambda = STRICT_FACTOR * r.lambda_min;
    let base = convexification_matrix(&r.point, r.alpha, lambda)?;
    let mut worst = min_eigenvalue(&base) / base.frobenius_norm();
    if radius == 0.0 {
        return Ok((worst > 0.0, worst));
    }
    let mut sampler = Sampler::new(seed);
    let c = r.point.to_vec();
    for _ in 0..samples {
        let q = PointE::new(
            c[0] * (1.0 + radius * sampler.uniform(-1.0, 1.0)),
            c[1] * (1.0 + radius * sampler.uniform(-1.0, 1.0)),
            c[2] * (1.0 + radius * sampler.uniform(-1.0, 1.0)),
        )?;
        let m = convexification_matrix(&q, r.alpha, lambda)?;
        worst = worst.min(min_eigenvalue(&m) / m.frobenius_norm());
    }
    Ok((worst >= -NEIGHBOR_PSD_TOL, worst))
}

/// Samples points within relative `radius` of the base point and checks the
/// matrix at `1.01·lambda_min` stays PSD there.
pub fn neighborhood_check(
    r: &LambdaResult,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<NeighborhoodOutcome> {
    if !(radius.is_finite() && (0.0..1.0).contains(&radius)) {
        return Err(Error::Precondition(format!(
            "radius {radius} not in [0, 1)"
        )));
    }
    let (passed, worst) = radius_passes(r, radius, samples, seed)?;
    let mut largest = 0.0;
    for rad in RADII {
        if radius_passes(r, rad, samples, seed)?.0 {
            largest = rad;
        }
    }
    Ok(NeighborhoodOutcome {
        radius,
        samples,
        passed,
        worst_relative_eigenvalue: worst,
        largest_passing_radius: largest,
    })
}
