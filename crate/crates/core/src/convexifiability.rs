//! The obstruction: at every point of E, the Hessian of `F[u]` is neither
//! nonnegative nor nonpositive for any smooth `F` with `F'[u] ≠ 0`.
//!
//! Two routes are provided.
//!
//! * The tangent route restricts `⟨ξ, D²u ξ⟩` to the plane `⟨Du, ξ⟩ = 0`,
//!   where the `F''` term of the chain rule vanishes, and writes it as a
//!   2×2 form in `(ξ1, ξ2)` ([`ReducedForm`]). A sign change of that form
//!   would be an `F`-independent certificate ([`find_certificate`]).
//!   For this `u` the restricted form is positive semidefinite with the
//!   radial direction `ξ = p` in its kernel, so this route reports
//!   [`Error::Degenerate`] at every point.
//! * The ray route perturbs the radial tangent direction along `Du`,
//!   `η = t·p + κ·Du`. Because `D²u p = −Du`, the cross term is
//!   `−2κt|Du|²` and dominates for large `|t|`, so the curvature of `F[u]`
//!   along `η` takes both signs for every `F` ([`ray_sign_flip`]).

use serde::{Deserialize, Serialize};

use crate::eigen::{sym2_eigen, sym3_eigenvalues};
use crate::error::{Error, Result};
use crate::field::{eval_u, grad_u, hess_u, pow, Alpha, PointE, Vec3};
use crate::monotone::{compose_hessian, normalized_compose_hessian, MonotoneF};

/// Relative tolerance for the tangent invariant `⟨Du, ξ⟩ = 0`.
pub const TANGENT_TOL: f64 = 1e-10;
/// Default relative tolerance for certificate values.
pub const CERT_TOL: f64 = 1e-10;
/// Relative size `|G|` must reach for a ray witness to count.
pub const SIGN_FLIP_TOL: f64 = 1e-10;
/// Within this distance of `α = 1` the tangent route is not attempted.
pub const ALPHA_ONE_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentDirection {
    xi: Vec3,
    base: PointE,
    alpha: Alpha,
}

impl TangentDirection {
    /// Wraps `xi` after checking `|⟨Du(base), xi⟩| ≤ 1e−10·‖Du‖·‖xi‖`.
    pub fn new(xi: Vec3, base: PointE, alpha: Alpha) -> Result<Self> {
        let g = grad_u(&base, alpha)?;
        let residual = g.dot(&xi).abs();
        if residual > TANGENT_TOL * g.norm() * xi.norm() {
            return Err(Error::Precondition(format!(
                "direction {:?} is not tangent at {base}: <Du, xi> = {residual:e}",
                xi.0
            )));
        }
        Ok(TangentDirection { xi, base, alpha })
    }

    pub fn xi(&self) -> Vec3 {
        self.xi
    }

    pub fn base(&self) -> PointE {
        self.base
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }
}

/// `ξ3 = z·x^α y^α/(x^α + y^α)·(ξ1/x^{α+1} + ξ2/y^{α+1})`, the unique third
/// component making `(ξ1, ξ2, ξ3)` orthogonal to `Du(p)`.
pub fn lift_tangent(xi1: f64, xi2: f64, p: &PointE, a: Alpha) -> Result<TangentDirection> {
    let av = a.value();
    let (xa, ya) = (pow(p.x(), av), pow(p.y(), av));
    let weight = xa * ya / (xa + ya);
    let xi3 = p.z() * weight * (xi1 / (xa * p.x()) + xi2 / (ya * p.y()));
    if !xi3.is_finite() {
        return Err(Error::Overflow {
            what: "lifted tangent component",
        });
    }
    TangentDirection::new(Vec3::new(xi1, xi2, xi3), *p, a)
}

/// `⟨ξ, D²u ξ⟩`; on the tangent plane this equals `F'[u]⁻¹⟨ξ, D²{F[u]} ξ⟩`
/// for every `F`.
pub fn curvature_on_tangent(xi: &TangentDirection) -> Result<f64> {
    Ok(hess_u(&xi.base, xi.alpha)?.quad(&xi.xi))
}

/// Matrix of `Q(ξ1, ξ2) = q11 ξ1² + 2 q12 ξ1 ξ2 + q22 ξ2²`, normalized so
/// that `z^α Q(ξ1, ξ2) = ⟨ξ, D²u ξ⟩` for the lifted `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedForm {
    pub q11: f64,
    pub q22: f64,
    pub q12: f64,
}

impl ReducedForm {
    /// Bracketed form with a free cross coupling `c`:
    ///
    /// ```text
    /// q11 = [α(α+1) − c·y^α/(x^α+y^α)] / x^{α+2}
    /// q22 = [α(α+1) − c·x^α/(x^α+y^α)] / y^{α+2}
    /// q12 = −c·x^α y^α/(x^α+y^α) / (x^{α+1} y^{α+1})
    /// ```
    ///
    /// Collecting the `ξ1ξ3`, `ξ2ξ3` and `ξ3²` terms of `⟨ξ, D²u ξ⟩` gives
    /// `α(α−1) − 2α² = −α(α+1)`, so the tangent restriction is the case
    /// `c = α(α+1)` ([`reduced_form`]). Any other coupling, e.g. `α² + 1`,
    /// does not reproduce `⟨ξ, D²u ξ⟩`.
    pub fn with_coupling(p: &PointE, a: Alpha, coupling: f64) -> Result<Self> {
        let av = a.value();
        let (x, y) = (p.x(), p.y());
        let (xa, ya) = (pow(x, av), pow(y, av));
        let diag = av * (av + 1.0);
        let sum = xa + ya;
        let form = ReducedForm {
            q11: (diag - coupling * (ya / sum)) / (xa * x * x),
            q22: (diag - coupling * (xa / sum)) / (ya * y * y),
            q12: -coupling * (xa * ya / sum) / ((xa * x) * (ya * y)),
        };
        if [form.q11, form.q22, form.q12].iter().all(|c| c.is_finite()) {
            Ok(form)
        } else {
            Err(Error::Overflow {
                what: "reduced form",
            })
        }
    }

    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        self.q11 * xi1 * xi1 + 2.0 * self.q12 * xi1 * xi2 + self.q22 * xi2 * xi2
    }

    pub fn det(&self) -> f64 {
        self.q11 * self.q22 - self.q12 * self.q12
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.q11 * self.q11 + self.q22 * self.q22 + 2.0 * self.q12 * self.q12
    }

    /// `det · x^{α+2} y^{α+2}`
    pub fn scaled_det(&self, p: &PointE, a: Alpha) -> f64 {
        let e = a.value() + 2.0;
        self.det() * pow(p.x(), e) * pow(p.y(), e)
    }
}

pub fn reduced_form(p: &PointE, a: Alpha) -> Result<ReducedForm> {
    let av = a.value();
    ReducedForm::with_coupling(p, a, av * (av + 1.0))
}

/// `α(α+1)(α(α+1) − c)`: the scaled determinant of
/// [`ReducedForm::with_coupling`] for coupling `c`, independent of the point.
pub fn coupling_determinant(a: Alpha, coupling: f64) -> f64 {
    let av = a.value();
    av * (av + 1.0) * (av * (av + 1.0) - coupling)
}

/// `α(α+1)(α−1)`, the determinant factor for coupling `α² + 1`.
///
/// This is not the determinant of the tangent restriction: [`reduced_form`]
/// has coupling `α(α+1)` and `coupling_determinant` is then zero for every α.
pub fn determinant_r(a: Alpha) -> f64 {
    let av = a.value();
    av * (av + 1.0) * (av - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateResiduals {
    /// `|⟨Du, ξ±⟩| / (‖Du‖‖ξ±‖)`
    pub tangent_plus: f64,
    pub tangent_minus: f64,
    /// relative gap between the reduced-form value and `⟨ξ, D²u ξ⟩`
    pub recompute_plus: f64,
    pub recompute_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndefinitenessCertificate {
    pub point: PointE,
    pub alpha: Alpha,
    pub xi_plus: Vec3,
    pub xi_minus: Vec3,
    pub value_plus: f64,
    pub value_minus: f64,
    pub tolerance: f64,
    pub residuals: CertificateResiduals,
}

/// Tangent-plane witnesses of opposite curvature sign, from the eigenvectors
/// of the reduced form. Requires `0 < α < 1 − ALPHA_ONE_BAND`.
pub fn find_certificate(p: &PointE, a: Alpha, tol: f64) -> Result<IndefinitenessCertificate> {
    let av = a.value();
    if av >= 1.0 {
        return Err(Error::Precondition(format!(
            "tangent certificate needs alpha < 1, got {av}"
        )));
    }
    if av > 1.0 - ALPHA_ONE_BAND {
        return Err(Error::Precondition(format!(
            "alpha = {av} is within {ALPHA_ONE_BAND} of 1; use the ray route"
        )));
    }
    let q = reduced_form(p, a)?;
    let det = q.det();
    let det_tol = tol * q.frobenius_sq();
    if det.abs() <= det_tol || det >= 0.0 {
        return Err(Error::Degenerate {
            alpha: av,
            det,
            tolerance: det_tol,
        });
    }
    let eig = sym2_eigen(q.q11, q.q22, q.q12);
    let za = pow(p.z(), av);
    let h = hess_u(p, a)?;
    let g = grad_u(p, a)?;

    let witness = |k: usize| -> Result<(Vec3, f64, f64, f64)> {
        let [c, s] = eig.vectors[k];
        let xi = lift_tangent(c, s, p, a)?;
        let value = za * eig.values[k];
        let recomputed = curvature_on_tangent(&xi)?;
        let v = xi.xi();
        let tangent = g.dot(&v).abs() / (g.norm() * v.norm());
        let gap = (value - recomputed).abs() / recomputed.abs().max(f64::MIN_POSITIVE);
        Ok((v, value, tangent, gap))
    };
    let (xi_plus, value_plus, tangent_plus, recompute_plus) = witness(0)?;
    let (xi_minus, value_minus, tangent_minus, recompute_minus) = witness(1)?;
    let scale = h.frobenius_norm() * xi_plus.norm().max(xi_minus.norm()).powi(2);
    let tolerance = tol * scale;
    if value_plus < tolerance || value_minus > -tolerance {
        return Err(Error::NoSignChange);
    }
    Ok(IndefinitenessCertificate {
        point: *p,
        alpha: a,
        xi_plus,
        xi_minus,
        value_plus,
        value_minus,
        tolerance,
        residuals: CertificateResiduals {
            tangent_plus,
            tangent_minus,
            recompute_plus,
            recompute_minus,
        },
    })
}

/// `⟨D²u·p, Du⟩`, the coefficient of `t` in the cross term along the radial
/// tangent direction. Equal to `−|Du|²` by homogeneity.
pub fn ray_coefficient(p: &PointE, a: Alpha) -> Result<f64> {
    let h = hess_u(p, a)?;
    let g = grad_u(p, a)?;
    Ok(h.mul_vec(&p.to_vec()).dot(&g))
}

/// `−z²/x⁴ − z²/y⁴ − (1/x + 1/y)²`, the α = 1 value of [`ray_coefficient`].
pub fn ray_coefficient_alpha_one(p: &PointE) -> f64 {
    let (x, y, z) = (p.x(), p.y(), p.z());
    -(z * z) / x.powi(4) - (z * z) / y.powi(4) - (1.0 / x + 1.0 / y).powi(2)
}

/// Curvature of `F[u]` along `η = ξ + κ·Du`, divided by `F'[u]`, with
/// `ξ = t·p` (the lift of `(t x, t y)`):
///
/// ```text
/// G(t, κ) = ⟨ξ, D²u ξ⟩ + 2κ⟨D²u ξ, Du⟩ + [F''/F' |Du|⁴ + ⟨D²u Du, Du⟩] κ²
/// ```
pub fn perturbed_curvature(p: &PointE, a: Alpha, f: &MonotoneF, t: f64, kappa: f64) -> Result<f64> {
    let h = hess_u(p, a)?;
    let g = grad_u(p, a)?;
    let ratio = f.curvature_ratio(eval_u(p, a)?)?;
    let xi = lift_tangent(t * p.x(), t * p.y(), p, a)?.xi();
    let g2 = g.dot(&g);
    let hxi = h.mul_vec(&xi);
    Ok(xi.dot(&hxi) + 2.0 * kappa * hxi.dot(&g) + (ratio * g2 * g2 + h.quad(&g)) * kappa * kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayWitness {
    pub t: f64,
    pub kappa: f64,
    /// `G(t, κ)`
    pub value: f64,
    /// `⟨η, D²{F[u]} η⟩ / F'[u]` from the full composed Hessian
    pub recomputed: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaySignFlip {
    pub point: PointE,
    pub alpha: Alpha,
    pub family: MonotoneF,
    /// `⟨D²u·p, Du⟩`
    pub coefficient_per_t: f64,
    /// closed form of the same coefficient, available at α = 1
    pub closed_form_per_t: Option<f64>,
    pub positive: RayWitness,
    pub negative: RayWitness,
}

impl RaySignFlip {
    /// Relative gap between the computed and closed-form coefficients.
    pub fn closed_form_gap(&self) -> Option<f64> {
        self.closed_form_per_t
            .map(|c| (self.coefficient_per_t - c).abs() / c.abs())
    }
}

/// Takes `η` along the eigenvectors of `D²u + (F''/F')Du Duᵀ` restricted to
/// `span{p, Du}`. Since `⟨Du, p⟩ = 0` that restriction is `[[0, b], [b, c]]`
/// in the orthonormal basis `p/|p|, Du/|Du|` with `b ≠ 0`, so it has one
/// eigenvalue of each sign. A witness counts if `|G| ≥ tol·scale`, where
/// `scale = ‖D²u + (F''/F')Du Duᵀ‖_F · ‖η‖²`.
pub fn ray_sign_flip(p: &PointE, a: Alpha, f: &MonotoneF, tol: f64) -> Result<RaySignFlip> {
    f.validate()?;
    let u = eval_u(p, a)?;
    f.strict_first(u)?;
    let h = hess_u(p, a)?;
    let g = grad_u(p, a)?;
    let coefficient = ray_coefficient(p, a)?;
    let coefficient_scale = h.frobenius_norm() * p.to_vec().norm() * g.norm();
    if coefficient.abs() < tol * coefficient_scale {
        return Err(Error::VanishingRayCoefficient {
            coefficient,
            tolerance: tol * coefficient_scale,
        });
    }
    let normalized = normalized_compose_hessian(f, p, a)?;
    let m_norm = normalized.frobenius_norm();

    let (pn, gn) = (p.to_vec().norm(), g.norm());
    let (ph, gh) = ((1.0 / pn) * p.to_vec(), (1.0 / gn) * g);
    let restricted = sym2_eigen(
        normalized.quad(&ph),
        normalized.quad(&gh),
        ph.dot(&normalized.mul_vec(&gh)),
    );

    let mut positive = None;
    let mut negative = None;
    for [vp, vg] in restricted.vectors {
        let (t, kappa) = (vp / pn, vg / gn);
        let eta = t * p.to_vec() + kappa * g;
        let tolerance = tol * m_norm * eta.dot(&eta);
        let value = perturbed_curvature(p, a, f, t, kappa)?;
        let witness = RayWitness {
            t,
            kappa,
            value,
            recomputed: normalized.quad(&eta),
            tolerance,
        };
        if value >= tolerance {
            positive = Some(witness);
        } else if value <= -tolerance {
            negative = Some(witness);
        }
    }
    match (positive, negative) {
        (Some(positive), Some(negative)) => Ok(RaySignFlip {
            point: *p,
            alpha: a,
            family: f.clone(),
            coefficient_per_t: coefficient,
            closed_form_per_t: (a.value() == 1.0).then(|| ray_coefficient_alpha_one(p)),
            positive,
            negative,
        }),
        _ => Err(Error::NoSignChange),
    }
}

/// [`ray_sign_flip`] at `α = 1`, carrying the closed-form coefficient.
pub fn alpha_one_sign_flip(p: &PointE, f: &MonotoneF) -> Result<RaySignFlip> {
    ray_sign_flip(p, Alpha::new(1.0)?, f, SIGN_FLIP_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum Certificate {
    Tangent(IndefinitenessCertificate),
    Ray { reason: String, flip: RaySignFlip },
}

/// Tries the tangent route where it is allowed and falls back to the ray
/// route, recording why.
pub fn certify(p: &PointE, a: Alpha, f: &MonotoneF, tol: f64) -> Result<Certificate> {
    let reason = if a.value() < 1.0 - ALPHA_ONE_BAND {
        match find_certificate(p, a, tol) {
            Ok(c) => return Ok(Certificate::Tangent(c)),
            Err(e) => e.to_string(),
        }
    } else {
        format!("alpha = {} is outside (0, {})", a, 1.0 - ALPHA_ONE_BAND)
    };
    let flip = ray_sign_flip(p, a, f, SIGN_FLIP_TOL)?;
    Ok(Certificate::Ray { reason, flip })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndefiniteOutcome {
    pub family: MonotoneF,
    pub eigenvalues: [f64; 3],
    pub tolerance: f64,
    pub passed: bool,
}

/// Eigenvalues of `D²{F[u]}` include one `≥ tol·‖·‖_F` and one `≤ −tol·‖·‖_F`.
pub fn composed_hessian_indefinite(
    p: &PointE,
    a: Alpha,
    f: &MonotoneF,
    tol: f64,
) -> Result<IndefiniteOutcome> {
    if a.value() > 1.0 {
        return Err(Error::Precondition(format!(
            "alpha must be in (0, 1], got {a}"
        )));
    }
    f.strict_first(eval_u(p, a)?)?;
    let m = compose_hessian(f, p, a)?;
    let eigenvalues = sym3_eigenvalues(&m);
    let tolerance = tol * m.frobenius_norm();
    Ok(IndefiniteOutcome {
        family: f.clone(),
        eigenvalues,
        tolerance,
        passed: eigenvalues[2] >= tolerance && eigenvalues[0] <= -tolerance,
    })
}

/// `|⟨ξ, D²{F[u]} ξ⟩ − F'[u]⟨ξ, D²u ξ⟩|` relative to `|F'|·‖D²u‖_F·‖ξ‖²`.
pub fn f_independence_residual(xi: &TangentDirection, f: &MonotoneF) -> Result<f64> {
    let (p, a) = (xi.base(), xi.alpha());
    let d1 = f.strict_first(eval_u(&p, a)?)?;
    let composed = compose_hessian(f, &p, a)?.quad(&xi.xi());
    let h = hess_u(&p, a)?;
    let reduced = d1 * h.quad(&xi.xi());
    let v = xi.xi();
    Ok((composed - reduced).abs() / (d1.abs() * h.frobenius_norm() * v.dot(&v)))
}
