//! Sampled checks that `u` is quasi-convex on E, both directly from the
//! defining inequality and through the reduction to the convex function
//! `v(s, t) = s^-α + t^-α` on the `(x/z, y/z)` plane.

use serde::{Deserialize, Serialize};

use crate::eigen::sym2_eigen;
use crate::error::{Error, Result};
use crate::field::{eval_u, eval_v, hess_v_diagonal, Alpha, PointE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSample {
    pub p1: PointE,
    pub p2: PointE,
    pub lambda: f64,
}

impl SegmentSample {
    pub fn new(p1: PointE, p2: PointE, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Precondition(format!(
                "lambda = {lambda} is not in [0, 1]"
            )));
        }
        Ok(SegmentSample { p1, p2, lambda })
    }

    pub fn interior_point(&self) -> Result<PointE> {
        PointE::convex_combination(&self.p1, &self.p2, self.lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    /// `u(λp1 + (1−λ)p2) − max(u(p1), u(p2))`
    pub margin: f64,
    pub max_endpoint: f64,
    pub passed: bool,
}

/// Passes iff `margin ≤ tol·(1 + |max|)`.
pub fn segment_test(s: &SegmentSample, a: Alpha, tol: f64) -> Result<SegmentOutcome> {
    let inner = eval_u(&s.interior_point()?, a)?;
    let max_endpoint = eval_u(&s.p1, a)?.max(eval_u(&s.p2, a)?);
    let margin = inner - max_endpoint;
    Ok(SegmentOutcome {
        margin,
        max_endpoint,
        passed: margin <= tol * (1.0 + max_endpoint.abs()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuWeights {
    pub mu1: f64,
    pub mu2: f64,
}

/// `μ_i = λ_i z_i / (λ_1 z_1 + λ_2 z_2)` with `λ_1 = λ`, `λ_2 = 1 − λ`.
pub fn mu_decompose(p1: &PointE, p2: &PointE, lambda: f64) -> Result<MuWeights> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} is not in [0, 1]"
        )));
    }
    let w1 = lambda * p1.z();
    let w2 = (1.0 - lambda) * p2.z();
    let total = w1 + w2;
    let mu1 = w1 / total;
    // μ1 + μ2 = 1 by construction rather than by rounding luck
    Ok(MuWeights {
        mu1,
        mu2: 1.0 - mu1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuIdentity {
    pub u_combination: f64,
    pub v_reduced: f64,
    pub absolute: f64,
    pub relative: f64,
}

/// Residual between `u` at the convex combination and `v` at the
/// μ-weighted combination of the projected endpoints.
pub fn mu_identity_check(p1: &PointE, p2: &PointE, lambda: f64, a: Alpha) -> Result<MuIdentity> {
    let mu = mu_decompose(p1, p2, lambda)?;
    let u_combination = eval_u(&PointE::convex_combination(p1, p2, lambda)?, a)?;
    let s = mu.mu1 * p1.x() / p1.z() + mu.mu2 * p2.x() / p2.z();
    let t = mu.mu1 * p1.y() / p1.z() + mu.mu2 * p2.y() / p2.z();
    let v_reduced = eval_v(s, t, a)?;
    let absolute = (u_combination - v_reduced).abs();
    Ok(MuIdentity {
        u_combination,
        v_reduced,
        absolute,
        relative: absolute / u_combination.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOutcome {
    pub u_combination: f64,
    pub weighted: f64,
    pub max_endpoint: f64,
    /// worst of the two steps, `≤ 0` when both hold exactly
    pub margin: f64,
    pub passed: bool,
}

/// `u(combination) ≤ μ1·u(p1) + μ2·u(p2) ≤ max(u(p1), u(p2))`, each step up
/// to `tol·(1 + max)`.
pub fn chain_inequality(s: &SegmentSample, a: Alpha, tol: f64) -> Result<ChainOutcome> {
    let mu = mu_decompose(&s.p1, &s.p2, s.lambda)?;
    let u1 = eval_u(&s.p1, a)?;
    let u2 = eval_u(&s.p2, a)?;
    let u_combination = eval_u(&s.interior_point()?, a)?;
    let weighted = mu.mu1 * u1 + mu.mu2 * u2;
    let max_endpoint = u1.max(u2);
    let margin = (u_combination - weighted).max(weighted - max_endpoint);
    Ok(ChainOutcome {
        u_combination,
        weighted,
        max_endpoint,
        margin,
        passed: margin <= tol * (1.0 + max_endpoint.abs()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VConvexity {
    pub points: usize,
    pub pairs: usize,
    /// smallest Hessian eigenvalue over the grid
    pub min_eigenvalue: f64,
    /// worst `(v(mid) − (v(a) + v(b))/2) / (1 + avg)` over the pairs
    pub worst_midpoint: f64,
    pub passed: bool,
}

pub const MIDPOINT_TOL: f64 = 1e-12;

/// Hessian eigenvalues of `v` at every grid point, and midpoint convexity on
/// every pair of grid points.
pub fn v_convexity_check(grid: &[(f64, f64)], a: Alpha) -> Result<VConvexity> {
    let mut min_eigenvalue = f64::INFINITY;
    for &(s, t) in grid {
        let (vss, vtt) = hess_v_diagonal(s, t, a)?;
        let e = sym2_eigen(vss, vtt, 0.0);
        min_eigenvalue = min_eigenvalue.min(e.values[1]);
    }
    let mut worst_midpoint = f64::NEG_INFINITY;
    let mut pairs = 0;
    for (i, &(s1, t1)) in grid.iter().enumerate() {
        for &(s2, t2) in &grid[i + 1..] {
            let mid = eval_v(0.5 * (s1 + s2), 0.5 * (t1 + t2), a)?;
            let avg = 0.5 * (eval_v(s1, t1, a)? + eval_v(s2, t2, a)?);
            worst_midpoint = worst_midpoint.max((mid - avg) / (1.0 + avg.abs()));
            pairs += 1;
        }
    }
    Ok(VConvexity {
        points: grid.len(),
        pairs,
        min_eigenvalue,
        worst_midpoint,
        passed: min_eigenvalue >= 0.0 && (pairs == 0 || worst_midpoint <= MIDPOINT_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64, z: f64) -> PointE {
        PointE::new(x, y, z).unwrap()
    }

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn degenerate_and_ray_segments() {
        let p = pt(1.0, 1.0, 1.0);
        for lambda in [0.0, 0.3, 1.0] {
            let s = SegmentSample::new(p, p, lambda).unwrap();
            let o = segment_test(&s, al(1.0), 1e-10).unwrap();
            assert_eq!(o.margin, 0.0);
            assert!(o.passed);
        }
        let s = SegmentSample::new(p, pt(2.0, 2.0, 2.0), 0.5).unwrap();
        let o = segment_test(&s, al(1.0), 1e-10).unwrap();
        assert_eq!(o.margin, 0.0);
        assert!(o.passed);
    }

    #[test]
    fn strict_interior_segment() {
        let s = SegmentSample::new(pt(1.0, 2.0, 1.0), pt(3.0, 1.0, 2.0), 0.3).unwrap();
        let a = al(0.5);
        let o = segment_test(&s, a, 1e-10).unwrap();
        // brute force: both sides from the formula, independent of eval_u
        let u = |x: f64, y: f64, z: f64| (z / x).sqrt() + (z / y).sqrt();
        let inner = u(0.3 + 2.1, 0.6 + 0.7, 0.3 + 1.4);
        let max = u(1.0, 2.0, 1.0).max(u(3.0, 1.0, 2.0));
        assert!((o.margin - (inner - max)).abs() < 1e-14);
        assert!(o.margin < 0.0 && o.passed);
    }

    #[test]
    fn lambda_out_of_range_is_rejected() {
        let p = pt(1.0, 1.0, 1.0);
        assert!(SegmentSample::new(p, p, 1.5).is_err());
        assert!(mu_decompose(&p, &p, -0.1).is_err());
    }

    #[test]
    fn mu_examples() {
        let w = mu_decompose(&pt(1.0, 2.0, 4.0), &pt(3.0, 1.0, 4.0), 0.5).unwrap();
        assert_eq!((w.mu1, w.mu2), (0.5, 0.5));
        let w = mu_decompose(&pt(1.0, 2.0, 1.0), &pt(3.0, 1.0, 5.0), 1.0).unwrap();
        assert_eq!((w.mu1, w.mu2), (1.0, 0.0));
        let w = mu_decompose(&pt(1.0, 1.0, 1.0), &pt(1.0, 1.0, 3.0), 0.25).unwrap();
        assert!((w.mu1 - 0.1).abs() < 1e-15 && (w.mu2 - 0.9).abs() < 1e-15);
    }

    #[test]
    fn mu_identity_examples() {
        let p1 = pt(0.5, 2.0, 1.5);
        let p2 = pt(4.0, 0.3, 0.7);
        assert_eq!(
            mu_identity_check(&p1, &p1, 0.4, al(0.7)).unwrap().absolute,
            0.0
        );
        let r = mu_identity_check(&p1, &p2, 0.0, al(0.7)).unwrap();
        assert!(r.relative <= 1e-15);
        let r = mu_identity_check(&p1, &p2, 0.37, al(1.9)).unwrap();
        assert!(r.relative <= 1e-10);
    }

    #[test]
    fn v_convexity_examples() {
        let r = v_convexity_check(&[(1.0, 1.0), (3.0, 3.0)], al(1.0)).unwrap();
        assert!(r.passed);
        // v(2,2) = 1 against (2 + 2/3)/2 = 4/3
        assert!((r.worst_midpoint - (1.0 - 4.0 / 3.0) / (1.0 + 4.0 / 3.0)).abs() < 1e-15);
        assert!(
            v_convexity_check(&[(1.0, 4.0), (4.0, 1.0)], al(0.5))
                .unwrap()
                .passed
        );
        let r = v_convexity_check(&[(0.2, 7.0)], al(2.0)).unwrap();
        assert!(r.passed && r.min_eigenvalue > 0.0 && r.pairs == 0);
    }

    #[test]
    fn chain_holds_on_a_grid() {
        let pts = [pt(0.1, 2.0, 0.5), pt(5.0, 0.2, 3.0), pt(1.0, 1.0, 9.0)];
        for a in [0.25, 1.0, 2.0] {
            for p1 in &pts {
                for p2 in &pts {
                    for lambda in [0.0, 0.2, 0.5, 0.9] {
                        let s = SegmentSample::new(*p1, *p2, lambda).unwrap();
                        assert!(chain_inequality(&s, al(a), 1e-10).unwrap().passed);
                    }
                }
            }
        }
    }
}
