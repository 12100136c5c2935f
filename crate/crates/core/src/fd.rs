//! Central finite-difference oracle for scalar fields on the positive octant.
//!
//! This module never calls the closed forms in [`crate::field`] directly; it
//! only sees a callback, so it can be used to check them.

use crate::error::{Error, Result};
use crate::field::{PointE, Sym3, Vec3};

/// Points closer than this to the boundary of E are rejected before any
/// stencil is built.
pub const BOUNDARY_GUARD: f64 = 1e-8;

/// Step per coordinate is `max(rel · |coordinate|, abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub rel: f64,
    pub abs: f64,
}

impl StepPolicy {
    pub const GRADIENT: StepPolicy = StepPolicy {
        rel: 1e-6,
        abs: 1e-8,
    };
    pub const HESSIAN: StepPolicy = StepPolicy {
        rel: 1e-4,
        abs: 1e-8,
    };

    fn steps(&self, p: &PointE) -> [f64; 3] {
        p.to_vec().0.map(|c| (self.rel * c.abs()).max(self.abs))
    }
}

fn checked_steps(p: &PointE, policy: StepPolicy) -> Result<[f64; 3]> {
    if p.min_coordinate() < BOUNDARY_GUARD {
        let (axis, value) = p
            .to_vec()
            .0
            .into_iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three coordinates");
        return Err(Error::StencilOutsideDomain {
            axis,
            value,
            step: 0.0,
        });
    }
    let h = policy.steps(p);
    let c = p.to_vec();
    for axis in 0..3 {
        if c[axis] - h[axis] <= 0.0 {
            return Err(Error::StencilOutsideDomain {
                axis,
                value: c[axis],
                step: h[axis],
            });
        }
    }
    Ok(h)
}

fn shifted(p: &PointE, offsets: [f64; 3]) -> Result<PointE> {
    let c = p.to_vec();
    PointE::new(c[0] + offsets[0], c[1] + offsets[1], c[2] + offsets[2])
}

fn unit(axis: usize, h: f64) -> [f64; 3] {
    let mut e = [0.0; 3];
    e[axis] = h;
    e
}

pub fn fd_gradient<F>(f: F, p: &PointE, policy: StepPolicy) -> Result<Vec3>
where
    F: Fn(&PointE) -> Result<f64>,
{
    let h = checked_steps(p, policy)?;
    let mut g = [0.0; 3];
    for axis in 0..3 {
        let plus = f(&shifted(p, unit(axis, h[axis]))?)?;
        let minus = f(&shifted(p, unit(axis, -h[axis]))?)?;
        g[axis] = (plus - minus) / (2.0 * h[axis]);
    }
    Ok(Vec3(g))
}

/// Second-order central stencil: three-point rule on the diagonal, four-point
/// rule on the mixed entries. Both `(i, j)` and `(j, i)` are evaluated and
/// averaged.
pub fn fd_hessian<F>(f: F, p: &PointE, policy: StepPolicy) -> Result<Sym3>
where
    F: Fn(&PointE) -> Result<f64>,
{
    let h = checked_steps(p, policy)?;
    let f0 = f(p)?;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        let plus = f(&shifted(p, unit(i, h[i]))?)?;
        let minus = f(&shifted(p, unit(i, -h[i]))?)?;
        m[i][i] = (plus - 2.0 * f0 + minus) / (h[i] * h[i]);
    }
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let at = |si: f64, sj: f64| -> Result<f64> {
                let mut o = [0.0; 3];
                o[i] = si * h[i];
                o[j] = sj * h[j];
                f(&shifted(p, o)?)
            };
            // (i, j) and (j, i) visit the same corners in a different order
            m[i][j] = ((at(1.0, 1.0)? - at(1.0, -1.0)?) - (at(-1.0, 1.0)? - at(-1.0, -1.0)?))
                / (4.0 * h[i] * h[j]);
        }
    }
    let sym = |i: usize, j: usize| 0.5 * (m[i][j] + m[j][i]);
    Ok(Sym3 {
        xx: m[0][0],
        yy: m[1][1],
        zz: m[2][2],
        xy: sym(0, 1),
        xz: sym(0, 2),
        yz: sym(1, 2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eval_u, grad_u, hess_u, Alpha};

    fn pt(x: f64, y: f64, z: f64) -> PointE {
        PointE::new(x, y, z).unwrap()
    }

    #[test]
    fn constant_and_linear_fields() {
        let p = pt(1.3, 0.4, 7.0);
        let g = fd_gradient(|_| Ok(5.0), &p, StepPolicy::GRADIENT).unwrap();
        assert_eq!(g, Vec3::ZERO);
        let g = fd_gradient(|q| Ok(q.x() + q.y() + q.z()), &p, StepPolicy::GRADIENT).unwrap();
        for c in g.0 {
            assert!((c - 1.0).abs() < 1e-9, "{c}");
        }
    }

    #[test]
    fn quadratic_field_gives_twice_the_matrix() {
        let a = Sym3 {
            xx: 2.0,
            yy: -1.0,
            zz: 0.5,
            xy: 0.3,
            xz: -0.7,
            yz: 1.1,
        };
        let p = pt(1.0, 2.0, 0.5);
        let h = fd_hessian(|q| Ok(a.quad(&q.to_vec())), &p, StepPolicy::HESSIAN).unwrap();
        let diff = (h - a.scale(2.0)).frobenius_norm();
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn matches_closed_forms_at_unit_point() {
        let p = pt(1.0, 1.0, 1.0);
        let a = Alpha::new(1.0).unwrap();
        let f = |q: &PointE| eval_u(q, a);
        let g = fd_gradient(f, &p, StepPolicy::GRADIENT).unwrap();
        assert!((g - grad_u(&p, a).unwrap()).norm() < 1e-6);

        let h = fd_hessian(f, &p, StepPolicy::HESSIAN).unwrap();
        let exact = hess_u(&p, a).unwrap();
        for (fd, cf) in [
            (h.xx, exact.xx),
            (h.yy, exact.yy),
            (h.xz, exact.xz),
            (h.yz, exact.yz),
        ] {
            assert!((fd - cf).abs() <= 1e-4 * cf.abs(), "{fd} vs {cf}");
        }
        assert!(h.xy.abs() <= 1e-6);
        assert!(h.zz.abs() <= 1e-6);
    }

    #[test]
    fn matches_closed_forms_off_diagonal_point() {
        let p = pt(2.0, 3.0, 1.0);
        let a = Alpha::new(0.5).unwrap();
        let h = fd_hessian(|q| eval_u(q, a), &p, StepPolicy::HESSIAN).unwrap();
        let exact = hess_u(&p, a).unwrap();
        for (fd, cf) in [
            (h.xx, exact.xx),
            (h.yy, exact.yy),
            (h.zz, exact.zz),
            (h.xz, exact.xz),
            (h.yz, exact.yz),
        ] {
            assert!((fd - cf).abs() <= 1e-4 * cf.abs(), "{fd} vs {cf}");
        }
        assert!(h.xy.abs() <= 1e-6);
    }

    #[test]
    fn rejects_points_near_the_boundary() {
        let p = pt(1e-9, 1.0, 1.0);
        assert!(matches!(
            fd_gradient(|_| Ok(0.0), &p, StepPolicy::GRADIENT),
            Err(Error::StencilOutsideDomain { axis: 0, .. })
        ));
        // absolute step larger than the coordinate
        let p = pt(2e-8, 1.0, 1.0);
        let wide = StepPolicy {
            rel: 1e-4,
            abs: 1e-7,
        };
        assert!(matches!(
            fd_hessian(|_| Ok(0.0), &p, wide),
            Err(Error::StencilOutsideDomain { axis: 0, .. })
        ));
    }
}
