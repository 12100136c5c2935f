//! Seeded batch runner. Each check is a pure function of a [`SampleInput`],
//! so the sampling loop and [`replay`] share one evaluation path.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::convexifiability::{
    alpha_one_sign_flip, certify, composed_hessian_indefinite, curvature_on_tangent, determinant_r,
    f_independence_residual, find_certificate, lift_tangent, ray_sign_flip, reduced_form,
    SIGN_FLIP_TOL,
};
use crate::eigen::min_eigenvalue;
use crate::error::{Error, Result};
use crate::fd::{fd_gradient, fd_hessian, StepPolicy};
use crate::field::{eval_u, eval_v, grad_u, hess_u, pow, Alpha, PointE};
use crate::lambda_search::{
    convexification_matrix, min_convexifying_lambda, min_convexifying_lambda_unguarded,
    neighborhood_check, LambdaResult,
};
use crate::monotone::MonotoneF;
use crate::quasiconvexity::{
    chain_inequality, mu_identity_check, segment_test, v_convexity_check, SegmentSample,
    MIDPOINT_TOL,
};
use crate::report::{
    CertificateRecord, CheckReport, FailureRecord, LambdaRecord, Mode, Report, RunConfig,
    Tolerances, MAX_FAILURE_RECORDS,
};
use crate::sampling::{SampleBox, Sampler};

pub const EULER_TOL: f64 = 1e-10;
pub const HOMOGENEITY_VALUE_TOL: f64 = 1e-12;
pub const HOMOGENEITY_GRAD_TOL: f64 = 1e-10;
pub const PROJECTION_TOL: f64 = 1e-12;
pub const QUASICONVEX_TOL: f64 = 1e-10;
pub const MU_IDENTITY_TOL: f64 = 1e-10;
pub const IDENTITY_REL_TOL: f64 = 1e-8;
pub const ZERO_DET_TOL: f64 = 1e-10;
pub const NEIGHBOR_RADIUS: f64 = 0.01;
pub const NEIGHBOR_SAMPLES: usize = 64;
/// Neighbourhoods are only required for α at or above this value.
pub const NEIGHBOR_MIN_ALPHA: f64 = 1.25;
pub const V_GRID_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    GradientOracle,
    HessianOracle,
    HessianXyZero,
    EulerOrthogonality,
    EulerHessian,
    Homogeneity,
    VProjection,
    Segment,
    MuIdentity,
    ChainInequality,
    VConvexity,
    DeterminantIdentity,
    TangentReduction,
    TangentCertificate,
    ComposedIndefinite,
    FIndependence,
    RaySignFlip,
    AlphaOneSignFlip,
    AlphaOneCoefficient,
    ConvexifyingLambda,
    LambdaDecreasing,
    EigenMonotone,
    Neighborhood,
    NegativeControl,
}

impl CheckId {
    pub fn name(self) -> &'static str {
        match self {
            CheckId::GradientOracle => "gradient-oracle",
            CheckId::HessianOracle => "hessian-oracle",
            CheckId::HessianXyZero => "hessian-xy-zero",
            CheckId::EulerOrthogonality => "euler-orthogonality",
            CheckId::EulerHessian => "euler-hessian",
            CheckId::Homogeneity => "homogeneity",
            CheckId::VProjection => "v-projection",
            CheckId::Segment => "segment",
            CheckId::MuIdentity => "mu-identity",
            CheckId::ChainInequality => "chain-inequality",
            CheckId::VConvexity => "v-convexity",
            CheckId::DeterminantIdentity => "determinant-identity",
            CheckId::TangentReduction => "tangent-reduction",
            CheckId::TangentCertificate => "tangent-certificate",
            CheckId::ComposedIndefinite => "composed-indefinite",
            CheckId::FIndependence => "f-independence",
            CheckId::RaySignFlip => "ray-sign-flip",
            CheckId::AlphaOneSignFlip => "alpha-one-sign-flip",
            CheckId::AlphaOneCoefficient => "alpha-one-coefficient",
            CheckId::ConvexifyingLambda => "convexifying-lambda",
            CheckId::LambdaDecreasing => "lambda-decreasing",
            CheckId::EigenMonotone => "eigen-monotone",
            CheckId::Neighborhood => "neighborhood",
            CheckId::NegativeControl => "negative-control",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CheckId::GradientOracle => "‖Du − FD‖ / ‖Du‖",
            CheckId::HessianOracle => "‖D²u − FD‖_F / (1 + ‖D²u‖_F)",
            CheckId::HessianXyZero => "|FD u_xy|",
            CheckId::EulerOrthogonality => "|⟨Du, p⟩| / (‖Du‖‖p‖)",
            CheckId::EulerHessian => "‖D²u p + Du‖ / (‖D²u‖_F‖p‖ + ‖Du‖)",
            CheckId::Homogeneity => "max(u(sp) vs u(p) / 1e-12, s·Du(sp) vs Du(p) / 1e-10)",
            CheckId::VProjection => "|u(x,y,z) − v(x/z, y/z)| / u",
            CheckId::Segment => "(u(λp1+(1−λ)p2) − max(u(p1),u(p2))) / (1 + max)",
            CheckId::MuIdentity => "|u(combination) − v(μ-combination)| / u",
            CheckId::ChainInequality => "worst step of u(comb) ≤ μ1u1 + μ2u2 ≤ max, / (1 + max)",
            CheckId::VConvexity => "worst midpoint excess of v, with Hessian eigenvalues ≥ 0",
            CheckId::DeterminantIdentity => {
                "|det(Q)x^{α+2}y^{α+2} − α(α+1)(α−1)| relative (absolute at α = 1)"
            }
            CheckId::TangentReduction => "|⟨ξ,D²uξ⟩ − z^α Q(ξ1,ξ2)| relative",
            CheckId::TangentCertificate => "tangent-plane witnesses of both signs exist (0 = yes)",
            CheckId::ComposedIndefinite => "D²{F[u]} has eigenvalues of both signs (0 = yes)",
            CheckId::FIndependence => "|⟨ξ,D²{F[u]}ξ⟩ − F'⟨ξ,D²uξ⟩| relative, ξ tangent",
            CheckId::RaySignFlip => "η = tp + κDu witnesses of both signs; recompute gap",
            CheckId::AlphaOneSignFlip => "α = 1 witnesses of both signs; recompute gap",
            CheckId::AlphaOneCoefficient => "⟨D²u p, Du⟩ vs closed form at α = 1, relative",
            CheckId::ConvexifyingLambda => "λ with D²u + λDuDuᵀ strictly PSD found (0 = yes)",
            CheckId::LambdaDecreasing => "λ_min strictly decreasing along the α ladder (0 = yes)",
            CheckId::EigenMonotone => "worst decrease of min eigenvalue along a λ ladder, relative",
            CheckId::Neighborhood => "PSD at 1.01·λ_min on 1% neighbours (0 = yes)",
            CheckId::NegativeControl => "α ≤ 1 reports not convexifiable (0 = yes)",
        }
    }

    pub fn limit(self, tol: &Tolerances) -> f64 {
        match self {
            CheckId::GradientOracle => tol.grad,
            CheckId::HessianOracle => tol.hess,
            CheckId::HessianXyZero => tol.hess_zero,
            CheckId::EulerOrthogonality | CheckId::EulerHessian => EULER_TOL,
            CheckId::Homogeneity => 1.0,
            CheckId::VProjection => PROJECTION_TOL,
            CheckId::Segment | CheckId::ChainInequality => QUASICONVEX_TOL,
            CheckId::MuIdentity => MU_IDENTITY_TOL,
            CheckId::VConvexity => MIDPOINT_TOL,
            CheckId::DeterminantIdentity
            | CheckId::TangentReduction
            | CheckId::FIndependence
            | CheckId::RaySignFlip
            | CheckId::AlphaOneSignFlip
            | CheckId::AlphaOneCoefficient => IDENTITY_REL_TOL,
            CheckId::EigenMonotone => 1e-12,
            CheckId::TangentCertificate
            | CheckId::ComposedIndefinite
            | CheckId::ConvexifyingLambda
            | CheckId::LambdaDecreasing
            | CheckId::Neighborhood
            | CheckId::NegativeControl => 0.0,
        }
    }
}

/// Inputs of a single check evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SampleInput {
    Point {
        point: PointE,
        alpha: Alpha,
    },
    Scaled {
        point: PointE,
        alpha: Alpha,
        scale: f64,
    },
    Segment {
        p1: PointE,
        p2: PointE,
        lambda: f64,
        alpha: Alpha,
    },
    Grid {
        grid: Vec<(f64, f64)>,
        alpha: Alpha,
    },
    Direction {
        point: PointE,
        alpha: Alpha,
        xi1: f64,
        xi2: f64,
    },
    Family {
        point: PointE,
        alpha: Alpha,
        family: MonotoneF,
    },
    DirectionFamily {
        point: PointE,
        alpha: Alpha,
        xi1: f64,
        xi2: f64,
        family: MonotoneF,
    },
    Ladder {
        point: PointE,
        alphas: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

impl Evaluation {
    fn measured(value: f64, limit: f64) -> Self {
        Evaluation {
            value: Some(value),
            passed: value <= limit,
            error: None,
        }
    }

    fn flag(ok: bool) -> Self {
        Evaluation {
            value: Some(if ok { 0.0 } else { 1.0 }),
            passed: ok,
            error: None,
        }
    }

    fn failed(e: impl ToString) -> Self {
        Evaluation {
            value: None,
            passed: false,
            error: Some(e.to_string()),
        }
    }
}

fn mismatch(check: CheckId) -> Error {
    Error::Precondition(format!("input kind does not fit check {}", check.name()))
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn lambda_for(
    point: &PointE,
    alpha: Alpha,
    tol: &Tolerances,
    guarded: bool,
) -> Result<LambdaResult> {
    if guarded {
        min_convexifying_lambda(point, alpha, tol.bisection)
    } else {
        min_convexifying_lambda_unguarded(point, alpha, tol.bisection)
    }
}

fn evaluate_inner(check: CheckId, input: &SampleInput, tol: &Tolerances) -> Result<Evaluation> {
    let limit = check.limit(tol);
    use SampleInput as S;
    let eval = match (check, input) {
        (CheckId::GradientOracle, S::Point { point, alpha }) => {
            let g = grad_u(point, *alpha)?;
            let fd = fd_gradient(|q| eval_u(q, *alpha), point, StepPolicy::GRADIENT)?;
            Evaluation::measured((g - fd).norm() / g.norm(), limit)
        }
        (CheckId::HessianOracle, S::Point { point, alpha }) => {
            let h = hess_u(point, *alpha)?;
            let fd = fd_hessian(|q| eval_u(q, *alpha), point, StepPolicy::HESSIAN)?;
            Evaluation::measured(
                (h - fd).frobenius_norm() / (1.0 + h.frobenius_norm()),
                limit,
            )
        }
        (CheckId::HessianXyZero, S::Point { point, alpha }) => {
            let fd = fd_hessian(|q| eval_u(q, *alpha), point, StepPolicy::HESSIAN)?;
            Evaluation::measured(fd.xy.abs(), limit)
        }
        (CheckId::EulerOrthogonality, S::Point { point, alpha }) => {
            let g = grad_u(point, *alpha)?;
            let p = point.to_vec();
            Evaluation::measured(g.dot(&p).abs() / (g.norm() * p.norm()), limit)
        }
        (CheckId::EulerHessian, S::Point { point, alpha }) => {
            let g = grad_u(point, *alpha)?;
            let h = hess_u(point, *alpha)?;
            let p = point.to_vec();
            let r = h.mul_vec(&p) + g;
            Evaluation::measured(r.norm() / (h.frobenius_norm() * p.norm() + g.norm()), limit)
        }
        (
            CheckId::Homogeneity,
            S::Scaled {
                point,
                alpha,
                scale,
            },
        ) => {
            let sp = point.scaled(*scale)?;
            let u = eval_u(point, *alpha)?;
            let us = eval_u(&sp, *alpha)?;
            let g = grad_u(point, *alpha)?;
            let gs = grad_u(&sp, *alpha)?;
            let value_gap = relative(us, u) / HOMOGENEITY_VALUE_TOL;
            let grad_gap = (0..3)
                .map(|k| relative(gs[k] * scale, g[k]))
                .fold(0.0, f64::max)
                / HOMOGENEITY_GRAD_TOL;
            Evaluation::measured(value_gap.max(grad_gap), limit)
        }
        (CheckId::VProjection, S::Point { point, alpha }) => {
            let u = eval_u(point, *alpha)?;
            let v = eval_v(point.x() / point.z(), point.y() / point.z(), *alpha)?;
            Evaluation::measured(relative(v, u), limit)
        }
        (
            CheckId::Segment,
            S::Segment {
                p1,
                p2,
                lambda,
                alpha,
            },
        ) => {
            let o = segment_test(&SegmentSample::new(*p1, *p2, *lambda)?, *alpha, limit)?;
            Evaluation {
                value: Some(o.margin / (1.0 + o.max_endpoint.abs())),
                passed: o.passed,
                error: None,
            }
        }
        (
            CheckId::MuIdentity,
            S::Segment {
                p1,
                p2,
                lambda,
                alpha,
            },
        ) => Evaluation::measured(mu_identity_check(p1, p2, *lambda, *alpha)?.relative, limit),
        (
            CheckId::ChainInequality,
            S::Segment {
                p1,
                p2,
                lambda,
                alpha,
            },
        ) => {
            let o = chain_inequality(&SegmentSample::new(*p1, *p2, *lambda)?, *alpha, limit)?;
            Evaluation {
                value: Some(o.margin / (1.0 + o.max_endpoint.abs())),
                passed: o.passed,
                error: None,
            }
        }
        (CheckId::VConvexity, S::Grid { grid, alpha }) => {
            let o = v_convexity_check(grid, *alpha)?;
            Evaluation {
                value: Some(o.worst_midpoint),
                passed: o.passed,
                error: None,
            }
        }
        (CheckId::DeterminantIdentity, S::Point { point, alpha }) => {
            let d = reduced_form(point, *alpha)?.scaled_det(point, *alpha);
            let r = determinant_r(*alpha);
            if alpha.value() == 1.0 {
                Evaluation::measured(d.abs(), ZERO_DET_TOL)
            } else {
                let sign_ok = d.signum() == r.signum() && d != 0.0;
                let gap = relative(d, r);
                Evaluation {
                    value: Some(gap),
                    passed: sign_ok && gap <= limit,
                    error: None,
                }
            }
        }
        (
            CheckId::TangentReduction,
            S::Direction {
                point,
                alpha,
                xi1,
                xi2,
            },
        ) => {
            let xi = lift_tangent(*xi1, *xi2, point, *alpha)?;
            let direct = curvature_on_tangent(&xi)?;
            let via_q =
                pow(point.z(), alpha.value()) * reduced_form(point, *alpha)?.eval(*xi1, *xi2);
            let v = xi.xi();
            let floor = 1e-6 * hess_u(point, *alpha)?.frobenius_norm() * v.dot(&v);
            Evaluation::measured((direct - via_q).abs() / direct.abs().max(floor), limit)
        }
        (CheckId::TangentCertificate, S::Point { point, alpha }) => {
            let c = find_certificate(point, *alpha, tol.cert)?;
            let r = &c.residuals;
            Evaluation::flag(
                c.value_plus >= c.tolerance
                    && c.value_minus <= -c.tolerance
                    && r.recompute_plus <= IDENTITY_REL_TOL
                    && r.recompute_minus <= IDENTITY_REL_TOL,
            )
        }
        (
            CheckId::ComposedIndefinite,
            S::Family {
                point,
                alpha,
                family,
            },
        ) => Evaluation::flag(composed_hessian_indefinite(point, *alpha, family, tol.cert)?.passed),
        (
            CheckId::FIndependence,
            S::DirectionFamily {
                point,
                alpha,
                xi1,
                xi2,
                family,
            },
        ) => {
            let xi = lift_tangent(*xi1, *xi2, point, *alpha)?;
            Evaluation::measured(f_independence_residual(&xi, family)?, limit)
        }
        (
            CheckId::RaySignFlip,
            S::Family {
                point,
                alpha,
                family,
            },
        ) => {
            let flip = ray_sign_flip(point, *alpha, family, SIGN_FLIP_TOL)?;
            let gap = [flip.positive, flip.negative]
                .iter()
                .map(|w| relative(w.recomputed, w.value))
                .fold(0.0, f64::max);
            Evaluation::measured(gap, limit)
        }
        (
            CheckId::AlphaOneSignFlip,
            S::Family {
                point,
                alpha,
                family,
            },
        ) => {
            if alpha.value() != 1.0 {
                return Err(Error::Precondition(format!(
                    "alpha-one check needs alpha = 1, got {alpha}"
                )));
            }
            let flip = alpha_one_sign_flip(point, family)?;
            let gap = [flip.positive, flip.negative]
                .iter()
                .map(|w| relative(w.recomputed, w.value))
                .fold(0.0, f64::max);
            Evaluation::measured(gap, limit)
        }
        (CheckId::AlphaOneCoefficient, S::Point { point, alpha }) => {
            if alpha.value() != 1.0 {
                return Err(Error::Precondition(format!(
                    "alpha-one check needs alpha = 1, got {alpha}"
                )));
            }
            let flip = alpha_one_sign_flip(point, &MonotoneF::Identity)?;
            Evaluation::measured(flip.closed_form_gap().unwrap_or(f64::INFINITY), limit)
        }
        (CheckId::ConvexifyingLambda, S::Point { point, alpha }) => {
            let r = lambda_for(point, *alpha, tol, true)?;
            Evaluation::flag(r.width <= tol.bisection && r.margin > 0.0)
        }
        (CheckId::LambdaDecreasing, S::Ladder { point, alphas }) => {
            let mut values = Vec::with_capacity(alphas.len());
            for &a in alphas {
                values.push(lambda_for(point, Alpha::new(a)?, tol, true)?.lambda_min);
            }
            Evaluation::flag(values.windows(2).all(|w| w[1] < w[0]))
        }
        (CheckId::EigenMonotone, S::Point { point, alpha }) => {
            let mut worst: f64 = 0.0;
            let mut prev: Option<f64> = None;
            for k in -4..=30 {
                let m = convexification_matrix(point, *alpha, 2f64.powi(k))?;
                let e = min_eigenvalue(&m);
                if let Some(prev) = prev {
                    worst = worst.max((prev - e) / m.frobenius_norm());
                }
                prev = Some(e);
            }
            Evaluation::measured(worst, limit)
        }
        (CheckId::Neighborhood, S::Point { point, alpha }) => {
            let r = lambda_for(point, *alpha, tol, true)?;
            let o = neighborhood_check(&r, NEIGHBOR_RADIUS, NEIGHBOR_SAMPLES, 0)?;
            Evaluation::flag(o.passed)
        }
        (CheckId::NegativeControl, S::Point { point, alpha }) => {
            match lambda_for(point, *alpha, tol, false) {
                Err(Error::NotConvexifiable { .. }) => Evaluation::flag(true),
                Err(e) => return Err(e),
                Ok(_) => Evaluation::flag(false),
            }
        }
        _ => return Err(mismatch(check)),
    };
    Ok(eval)
}

/// Evaluates one check on one input; library errors count as failures.
pub fn evaluate(check: CheckId, input: &SampleInput, tol: &Tolerances) -> Evaluation {
    evaluate_inner(check, input, tol).unwrap_or_else(Evaluation::failed)
}

/// Re-evaluates a recorded failure.
pub fn replay(check: CheckId, record: &FailureRecord, tol: &Tolerances) -> Evaluation {
    evaluate(check, &record.input, tol)
}

pub fn run_check(
    suite: Mode,
    check: CheckId,
    inputs: &[SampleInput],
    tol: &Tolerances,
) -> CheckReport {
    let mut failures = 0;
    let mut records = Vec::new();
    let mut worst: Option<(f64, usize)> = None;
    for (index, input) in inputs.iter().enumerate() {
        let e = evaluate(check, input, tol);
        if let Some(v) = e.value {
            if worst.is_none_or(|(w, _)| v > w) {
                worst = Some((v, index));
            }
        }
        if !e.passed {
            failures += 1;
            if records.len() < MAX_FAILURE_RECORDS {
                records.push(FailureRecord {
                    index,
                    input: input.clone(),
                    value: e.value,
                    error: e.error,
                });
            }
        }
    }
    CheckReport {
        suite,
        check,
        description: check.description().to_string(),
        passed: failures == 0 && !inputs.is_empty(),
        samples: inputs.len(),
        failures,
        limit: check.limit(tol),
        worst_value: worst.map(|(v, _)| v),
        worst_input: worst.map(|(_, i)| inputs[i].clone()),
        truncated: failures > records.len(),
        failure_records: records,
    }
}

/// Draws `n` `(point, α)` pairs: a fixed point if configured, α cycling
/// through the ladder if one is given, otherwise uniform in `[lo, hi]`.
fn point_alpha_pairs(
    s: &mut Sampler,
    n: usize,
    fixed: Option<PointE>,
    b: SampleBox,
    ladder: &[f64],
    range: (f64, f64),
) -> Vec<(PointE, Alpha)> {
    (0..n)
        .map(|i| {
            let p = fixed.unwrap_or_else(|| s.point(b));
            let a = if ladder.is_empty() {
                s.alpha(range.0, range.1)
            } else {
                Alpha::new(ladder[i % ladder.len()]).expect("validated alpha")
            };
            (p, a)
        })
        .collect()
}

struct SuiteOutput {
    checks: Vec<CheckReport>,
    certificates: Vec<CertificateRecord>,
    lambda_results: Vec<LambdaRecord>,
}

fn derivatives_suite(cfg: &RunConfig) -> SuiteOutput {
    let mode = Mode::VerifyDerivatives;
    let mut s = Sampler::stream(cfg.seed, mode.stream());
    let b = cfg.box_for(mode);
    let pairs = point_alpha_pairs(
        &mut s,
        cfg.samples,
        cfg.point(),
        b,
        &cfg.alphas_for(mode),
        (0.1, 3.0),
    );
    let points: Vec<SampleInput> = pairs
        .iter()
        .map(|&(point, alpha)| SampleInput::Point { point, alpha })
        .collect();
    let scaled: Vec<SampleInput> = pairs
        .iter()
        .map(|&(point, alpha)| SampleInput::Scaled {
            point,
            alpha,
            scale: s.log_uniform(SampleBox {
                lo: 0.01,
                hi: 100.0,
            }),
        })
        .collect();
    let tol = &cfg.tolerances;
    let mut checks: Vec<CheckReport> = [
        CheckId::GradientOracle,
        CheckId::HessianOracle,
        CheckId::HessianXyZero,
        CheckId::EulerOrthogonality,
        CheckId::EulerHessian,
        CheckId::VProjection,
    ]
    .into_iter()
    .map(|c| run_check(mode, c, &points, tol))
    .collect();
    checks.push(run_check(mode, CheckId::Homogeneity, &scaled, tol));
    SuiteOutput {
        checks,
        certificates: vec![],
        lambda_results: vec![],
    }
}

fn quasiconvexity_suite(cfg: &RunConfig) -> SuiteOutput {
    let mode = Mode::Quasiconvexity;
    let mut s = Sampler::stream(cfg.seed, mode.stream());
    let b = cfg.box_for(mode);
    let ladder = cfg.alphas_for(mode);
    let alpha_at = |i: usize| Alpha::new(ladder[i % ladder.len()]).expect("validated alpha");
    let segments: Vec<SampleInput> = (0..cfg.samples)
        .map(|i| {
            let p1 = cfg.point().unwrap_or_else(|| s.point(b));
            let p2 = s.point(b);
            let lambda = s.unit();
            SampleInput::Segment {
                p1,
                p2,
                lambda,
                alpha: alpha_at(i),
            }
        })
        .collect();
    let grids: Vec<SampleInput> = (0..cfg.samples.div_ceil(100))
        .map(|i| SampleInput::Grid {
            grid: (0..V_GRID_POINTS)
                .map(|_| (s.log_uniform(b), s.log_uniform(b)))
                .collect(),
            alpha: alpha_at(i),
        })
        .collect();
    let tol = &cfg.tolerances;
    let checks = vec![
        run_check(mode, CheckId::Segment, &segments, tol),
        run_check(mode, CheckId::MuIdentity, &segments, tol),
        run_check(mode, CheckId::ChainInequality, &segments, tol),
        run_check(mode, CheckId::VConvexity, &grids, tol),
    ];
    SuiteOutput {
        checks,
        certificates: vec![],
        lambda_results: vec![],
    }
}

fn certificate_record(point: PointE, alpha: Alpha, tol: &Tolerances) -> CertificateRecord {
    let tangent_route = match find_certificate(&point, alpha, tol.cert) {
        Ok(_) => "found".to_string(),
        Err(e) => e.to_string(),
    };
    let (certificate, error) = match certify(&point, alpha, &MonotoneF::Identity, tol.cert) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    CertificateRecord {
        point,
        alpha,
        tangent_route,
        certificate,
        error,
    }
}

fn convexifiability_suite(cfg: &RunConfig) -> SuiteOutput {
    let mode = Mode::Convexifiability;
    let mut s = Sampler::stream(cfg.seed, mode.stream());
    let b = cfg.box_for(mode);
    let tol = &cfg.tolerances;
    let families = MonotoneF::test_families();
    let ladder = cfg.alphas_for(mode);

    // determinant identity over α ∈ [0.1, 3], every tenth sample at α = 1
    let det_inputs: Vec<SampleInput> = (0..cfg.samples)
        .map(|i| {
            let point = cfg.point().unwrap_or_else(|| s.point(b));
            let alpha = if !cfg.alphas.is_empty() {
                Alpha::new(cfg.alphas[i % cfg.alphas.len()]).expect("validated alpha")
            } else if i % 10 == 0 {
                Alpha::new(1.0).expect("one")
            } else {
                s.alpha(0.1, 3.0)
            };
            SampleInput::Point { point, alpha }
        })
        .collect();
    let directions: Vec<SampleInput> = det_inputs
        .iter()
        .map(|input| match input {
            SampleInput::Point { point, alpha } => SampleInput::Direction {
                point: *point,
                alpha: *alpha,
                xi1: s.uniform(-1.0, 1.0),
                xi2: s.uniform(-1.0, 1.0),
            },
            _ => unreachable!(),
        })
        .collect();

    let mut points = Vec::new();
    let mut families_in = Vec::new();
    let mut direction_families = Vec::new();
    let mut certificates = Vec::new();
    for &a in &ladder {
        let alpha = Alpha::new(a).expect("validated alpha");
        for i in 0..cfg.samples {
            let point = cfg.point().unwrap_or_else(|| s.point(b));
            let (xi1, xi2) = (s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0));
            if i == 0 {
                certificates.push(certificate_record(point, alpha, tol));
            }
            points.push(SampleInput::Point { point, alpha });
            for family in &families {
                families_in.push(SampleInput::Family {
                    point,
                    alpha,
                    family: family.clone(),
                });
                direction_families.push(SampleInput::DirectionFamily {
                    point,
                    alpha,
                    xi1,
                    xi2,
                    family: family.clone(),
                });
            }
        }
    }
    let checks = vec![
        run_check(mode, CheckId::DeterminantIdentity, &det_inputs, tol),
        run_check(mode, CheckId::TangentReduction, &directions, tol),
        run_check(mode, CheckId::TangentCertificate, &points, tol),
        run_check(mode, CheckId::ComposedIndefinite, &families_in, tol),
        run_check(mode, CheckId::FIndependence, &direction_families, tol),
        run_check(mode, CheckId::RaySignFlip, &families_in, tol),
    ];
    SuiteOutput {
        checks,
        certificates,
        lambda_results: vec![],
    }
}

fn alpha_one_suite(cfg: &RunConfig) -> SuiteOutput {
    let mode = Mode::AlphaOne;
    let mut s = Sampler::stream(cfg.seed, mode.stream());
    let b = cfg.box_for(mode);
    let tol = &cfg.tolerances;
    let alpha = Alpha::new(1.0).expect("one");
    let mut points = Vec::new();
    let mut families_in = Vec::new();
    for _ in 0..cfg.samples {
        let point = cfg.point().unwrap_or_else(|| s.point(b));
        points.push(SampleInput::Point { point, alpha });
        for family in MonotoneF::test_families() {
            families_in.push(SampleInput::Family {
                point,
                alpha,
                family,
            });
        }
    }
    let first = match &points[0] {
        SampleInput::Point { point, .. } => *point,
        _ => unreachable!(),
    };
    let checks = vec![
        run_check(mode, CheckId::AlphaOneSignFlip, &families_in, tol),
        run_check(mode, CheckId::AlphaOneCoefficient, &points, tol),
    ];
    SuiteOutput {
        checks,
        certificates: vec![certificate_record(first, alpha, tol)],
        lambda_results: vec![],
    }
}

fn lambda_suite(cfg: &RunConfig) -> SuiteOutput {
    let mode = Mode::LambdaSearch;
    let tol = &cfg.tolerances;
    let point = cfg
        .point()
        .unwrap_or(PointE::new(1.0, 1.0, 1.0).expect("unit point"));
    let ladder = cfg.alphas_for(mode);
    let alphas: Vec<Alpha> = ladder
        .iter()
        .map(|&a| Alpha::new(a).expect("validated alpha"))
        .collect();
    let inputs: Vec<SampleInput> = alphas
        .iter()
        .map(|&alpha| SampleInput::Point { point, alpha })
        .collect();
    let neighborhood: Vec<SampleInput> = alphas
        .iter()
        .filter(|a| a.value() >= NEIGHBOR_MIN_ALPHA)
        .map(|&alpha| SampleInput::Point { point, alpha })
        .collect();
    let control = vec![SampleInput::Point {
        point,
        alpha: Alpha::new(0.5).expect("half"),
    }];
    let lambda_results = alphas
        .iter()
        .map(
            |&alpha| match min_convexifying_lambda(&point, alpha, tol.bisection) {
                Ok(r) => LambdaRecord {
                    point,
                    alpha,
                    result: Some(r),
                    error: None,
                },
                Err(e) => LambdaRecord {
                    point,
                    alpha,
                    result: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    let mut checks = vec![
        run_check(mode, CheckId::ConvexifyingLambda, &inputs, tol),
        run_check(
            mode,
            CheckId::LambdaDecreasing,
            &[SampleInput::Ladder {
                point,
                alphas: ladder.clone(),
            }],
            tol,
        ),
        run_check(mode, CheckId::EigenMonotone, &inputs, tol),
    ];
    if !neighborhood.is_empty() {
        checks.push(run_check(mode, CheckId::Neighborhood, &neighborhood, tol));
    }
    checks.push(run_check(mode, CheckId::NegativeControl, &control, tol));
    SuiteOutput {
        checks,
        certificates: vec![],
        lambda_results,
    }
}

fn run_suite(mode: Mode, cfg: &RunConfig) -> SuiteOutput {
    match mode {
        Mode::VerifyDerivatives => derivatives_suite(cfg),
        Mode::Quasiconvexity => quasiconvexity_suite(cfg),
        Mode::Convexifiability => convexifiability_suite(cfg),
        Mode::AlphaOne => alpha_one_suite(cfg),
        Mode::LambdaSearch => lambda_suite(cfg),
        Mode::FullSuite => unreachable!("full-suite is expanded by run"),
    }
}

/// Runs the configured suite(s). `timing` adds wall time to the report,
/// which makes it differ between runs.
pub fn run(cfg: &RunConfig, timing: bool) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let suites: Vec<Mode> = match cfg.mode {
        Mode::FullSuite => Mode::SUITES.to_vec(),
        m => vec![m],
    };
    let mut checks = Vec::new();
    let mut certificates = Vec::new();
    let mut lambda_results = Vec::new();
    for mode in suites {
        let out = run_suite(mode, cfg);
        checks.extend(out.checks);
        certificates.extend(out.certificates);
        lambda_results.extend(out.lambda_results);
    }
    let worst_residuals: BTreeMap<String, f64> = checks
        .iter()
        .filter_map(|c| {
            c.worst_value
                .map(|v| (format!("{}/{}", c.suite.name(), c.check.name()), v))
        })
        .collect();
    Ok(Report {
        tool: "qcx",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        certificates,
        lambda_results,
        worst_residuals,
        wall_time_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> RunConfig {
        RunConfig {
            mode,
            samples: 20,
            ..RunConfig::default()
        }
    }

    #[test]
    fn zero_samples_is_a_config_error() {
        let cfg = RunConfig {
            samples: 0,
            ..small(Mode::Quasiconvexity)
        };
        assert!(run(&cfg, false).is_err());
    }

    #[test]
    fn true_statements_pass() {
        let report = run(&small(Mode::Quasiconvexity), false).unwrap();
        assert!(report.passed, "{}", report.to_text());
        let report = run(&small(Mode::AlphaOne), false).unwrap();
        assert!(report.passed, "{}", report.to_text());
    }

    #[test]
    fn mismatched_input_is_a_failure() {
        let p = PointE::new(1.0, 1.0, 1.0).unwrap();
        let input = SampleInput::Point {
            point: p,
            alpha: Alpha::new(1.0).unwrap(),
        };
        let e = evaluate(CheckId::Segment, &input, &Tolerances::default());
        assert!(!e.passed && e.error.is_some());
    }

    #[test]
    fn failure_records_replay() {
        let cfg = RunConfig {
            samples: 5,
            ..small(Mode::Convexifiability)
        };
        let report = run(&cfg, false).unwrap();
        let tangent = report
            .checks
            .iter()
            .find(|c| c.check == CheckId::TangentCertificate)
            .unwrap();
        assert!(!tangent.failure_records.is_empty());
        for r in &tangent.failure_records {
            let e = replay(CheckId::TangentCertificate, r, &cfg.tolerances);
            assert!(!e.passed);
            assert_eq!(e.error, r.error);
        }
    }

    #[test]
    fn inputs_roundtrip_through_json() {
        let p = PointE::new(1.0, 2.0, 3.0).unwrap();
        let a = Alpha::new(0.5).unwrap();
        for input in [
            SampleInput::Point { point: p, alpha: a },
            SampleInput::Segment {
                p1: p,
                p2: p,
                lambda: 0.25,
                alpha: a,
            },
            SampleInput::Family {
                point: p,
                alpha: a,
                family: MonotoneF::Exponential { rate: 5.0 },
            },
            SampleInput::Ladder {
                point: p,
                alphas: vec![1.5, 2.0],
            },
        ] {
            let s = serde_json::to_string(&input).unwrap();
            assert_eq!(serde_json::from_str::<SampleInput>(&s).unwrap(), input);
        }
    }
}
