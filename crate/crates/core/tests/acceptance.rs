//! Acceptance suite: one PASS/FAIL line per criterion, with sub-lines for
//! each measured part. Exits non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use qcx::convexifiability::{determinant_r, ray_coefficient_alpha_one, reduced_form};
use qcx::harness::{run_check, CheckId, SampleInput};
use qcx::monotone::MonotoneF;
use qcx::report::{CheckReport, Mode, Tolerances};
use qcx::sampling::Sampler;
use qcx::{Alpha, PointE};

const SEED: u64 = 20_240_601;

struct Criterion {
    id: u32,
    title: &'static str,
    lines: Vec<(bool, String)>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            lines: vec![],
        }
    }

    fn line(&mut self, ok: bool, text: String) {
        self.lines.push((ok, text));
    }

    fn check(&mut self, label: &str, r: &CheckReport) {
        let worst = r
            .worst_value
            .map(|v| format!("{v:.3e}"))
            .unwrap_or_else(|| "-".into());
        let mut text = format!(
            "{label}: {} of {} samples fail, worst {worst}, limit {:.0e}",
            r.failures, r.samples, r.limit
        );
        if let Some(f) = r.failure_records.first() {
            if let Some(e) = &f.error {
                text.push_str(&format!("; first error: {e}"));
            }
        }
        self.line(r.passed, text);
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.line(
            elapsed < limit,
            format!(
                "runtime {:.2} s, limit {} s",
                elapsed.as_secs_f64(),
                limit.as_secs()
            ),
        );
    }

    fn passed(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }

    fn print(&self) {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {}", self.id, self.title);
        for (ok, text) in &self.lines {
            println!("    {} {text}", if *ok { "ok  " } else { "FAIL" });
        }
    }
}

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

fn unit_point() -> PointE {
    PointE::new(1.0, 1.0, 1.0).unwrap()
}

fn derivatives(tol: &Tolerances) -> Criterion {
    let mut c = Criterion::new(1, "derivative oracles, 1000 samples");
    let start = Instant::now();
    let mut s = Sampler::stream(SEED, 1);
    let b = Mode::VerifyDerivatives.default_box();
    let inputs: Vec<SampleInput> = (0..1000)
        .map(|_| SampleInput::Point {
            point: s.point(b),
            alpha: s.alpha(0.1, 3.0),
        })
        .collect();
    let grad = run_check(
        Mode::VerifyDerivatives,
        CheckId::GradientOracle,
        &inputs,
        tol,
    );
    let hess = run_check(
        Mode::VerifyDerivatives,
        CheckId::HessianOracle,
        &inputs,
        tol,
    );
    let xy = run_check(
        Mode::VerifyDerivatives,
        CheckId::HessianXyZero,
        &inputs,
        tol,
    );
    let elapsed = start.elapsed();
    c.check("gradient, relative", &grad);
    c.check("Hessian, relative to 1 + ‖D²u‖_F", &hess);
    c.check("u_xy, absolute", &xy);
    c.runtime(elapsed, Duration::from_secs(5));
    c
}

fn quasiconvexity(tol: &Tolerances) -> Criterion {
    let mut c = Criterion::new(2, "quasi-convexity, 1e5 segments");
    let start = Instant::now();
    let mut s = Sampler::stream(SEED, 2);
    let b = Mode::Quasiconvexity.default_box();
    let alphas = Mode::Quasiconvexity.default_alphas();
    let inputs: Vec<SampleInput> = (0..100_000)
        .map(|i| SampleInput::Segment {
            p1: s.point(b),
            p2: s.point(b),
            lambda: s.unit(),
            alpha: alpha(alphas[i % alphas.len()]),
        })
        .collect();
    let seg = run_check(Mode::Quasiconvexity, CheckId::Segment, &inputs, tol);
    let mu = run_check(Mode::Quasiconvexity, CheckId::MuIdentity, &inputs, tol);
    let elapsed = start.elapsed();
    c.check("u(λp1+(1−λ)p2) ≤ max + 1e-10·scale", &seg);
    c.check("μ-decomposition identity, relative", &mu);
    c.runtime(elapsed, Duration::from_secs(30));
    c
}

fn determinant(tol: &Tolerances) -> Criterion {
    let mut c = Criterion::new(3, "determinant identity, 1000 samples, α ∈ [0.1, 3]");
    let mut s = Sampler::stream(SEED, 3);
    let b = Mode::Convexifiability.default_box();
    let inputs: Vec<SampleInput> = (0..1000)
        .map(|i| SampleInput::Point {
            point: s.point(b),
            alpha: if i % 10 == 0 {
                alpha(1.0)
            } else {
                s.alpha(0.1, 3.0)
            },
        })
        .collect();
    let identity = run_check(
        Mode::Convexifiability,
        CheckId::DeterminantIdentity,
        &inputs,
        tol,
    );
    c.check(
        "det·x^{α+2}y^{α+2} = α(α+1)(α−1), relative 1e-8 (1e-10 absolute at α = 1)",
        &identity,
    );

    let (mut below, mut below_ok, mut one, mut one_ok, mut above, mut above_ok) =
        (0, 0, 0, 0, 0, 0);
    for input in &inputs {
        let SampleInput::Point { point, alpha } = input else {
            unreachable!()
        };
        let d = reduced_form(point, *alpha)
            .unwrap()
            .scaled_det(point, *alpha);
        let a = alpha.value();
        if a < 1.0 {
            below += 1;
            below_ok += usize::from(d < 0.0);
        } else if a == 1.0 {
            one += 1;
            one_ok += usize::from(d.abs() <= 1e-10);
        } else {
            above += 1;
            above_ok += usize::from(d > 0.0);
        }
        debug_assert_eq!(determinant_r(*alpha).signum(), (a - 1.0).signum());
    }
    c.line(
        below_ok == below,
        format!("negative for α < 1: {below_ok} of {below}"),
    );
    c.line(
        one_ok == one,
        format!("|·| ≤ 1e-10 at α = 1: {one_ok} of {one}"),
    );
    c.line(
        above_ok == above,
        format!("positive for α > 1: {above_ok} of {above}"),
    );
    c
}

fn certificates(tol: &Tolerances) -> Criterion {
    let mut c = Criterion::new(
        4,
        "indefiniteness certificates, 200 points × α ∈ {0.25, 0.5, 0.75, 0.9}",
    );
    let mut s = Sampler::stream(SEED, 4);
    let b = Mode::Convexifiability.default_box();
    let mut points = Vec::new();
    let mut families = Vec::new();
    for a in [0.25, 0.5, 0.75, 0.9] {
        for _ in 0..200 {
            let point = s.point(b);
            points.push(SampleInput::Point {
                point,
                alpha: alpha(a),
            });
            for family in MonotoneF::test_families() {
                families.push(SampleInput::Family {
                    point,
                    alpha: alpha(a),
                    family,
                });
            }
        }
    }
    let tangent = run_check(
        Mode::Convexifiability,
        CheckId::TangentCertificate,
        &points,
        tol,
    );
    let composed = run_check(
        Mode::Convexifiability,
        CheckId::ComposedIndefinite,
        &families,
        tol,
    );
    c.check(
        "find_certificate: opposite-sign tangent witnesses, recomputed to 1e-8",
        &tangent,
    );
    c.check("composed_hessian_indefinite for every F", &composed);
    c
}

fn alpha_one(tol: &Tolerances) -> Criterion {
    let mut c = Criterion::new(5, "α = 1 sign flip, 200 points × F families");
    let mut s = Sampler::stream(SEED, 5);
    let b = Mode::AlphaOne.default_box();
    let mut points = Vec::new();
    let mut families = Vec::new();
    for _ in 0..200 {
        let point = s.point(b);
        points.push(SampleInput::Point {
            point,
            alpha: alpha(1.0),
        });
        for family in MonotoneF::test_families() {
            families.push(SampleInput::Family {
                point,
                alpha: alpha(1.0),
                family,
            });
        }
    }
    let flip = run_check(Mode::AlphaOne, CheckId::AlphaOneSignFlip, &families, tol);
    let coefficient = run_check(Mode::AlphaOne, CheckId::AlphaOneCoefficient, &points, tol);
    c.check("witnesses of both signs, recomputed to 1e-8", &flip);
    c.check("⟨D²u p, Du⟩ vs closed form, relative 1e-8", &coefficient);
    let at_unit = ray_coefficient_alpha_one(&unit_point());
    c.line(
        (at_unit + 6.0).abs() <= 1e-8 * 6.0,
        format!("closed form at (1,1,1): {at_unit} per unit t, expected −6"),
    );
    c
}

fn lambda(tol: &Tolerances) -> Criterion {
    let mut c = Criterion::new(6, "λ-convexification at (1,1,1)");
    let p = unit_point();
    let ladder = Mode::LambdaSearch.default_alphas();
    let inputs: Vec<SampleInput> = ladder
        .iter()
        .map(|&a| SampleInput::Point {
            point: p,
            alpha: alpha(a),
        })
        .collect();
    let neighbors: Vec<SampleInput> = ladder
        .iter()
        .filter(|&&a| a >= 1.25)
        .map(|&a| SampleInput::Point {
            point: p,
            alpha: alpha(a),
        })
        .collect();
    let found = run_check(
        Mode::LambdaSearch,
        CheckId::ConvexifyingLambda,
        &inputs,
        tol,
    );
    let ladder_input = [SampleInput::Ladder {
        point: p,
        alphas: ladder.clone(),
    }];
    let decreasing = run_check(
        Mode::LambdaSearch,
        CheckId::LambdaDecreasing,
        &ladder_input,
        tol,
    );
    let hood = run_check(Mode::LambdaSearch, CheckId::Neighborhood, &neighbors, tol);
    let control_input = [SampleInput::Point {
        point: p,
        alpha: alpha(0.5),
    }];
    let control = run_check(
        Mode::LambdaSearch,
        CheckId::NegativeControl,
        &control_input,
        tol,
    );
    c.check(
        "min_convexifying_lambda succeeds, bisection width ≤ 1e-6",
        &found,
    );
    c.check("lambda_min strictly decreasing in α", &decreasing);
    c.check("PSD at 1.01·lambda_min on 1% neighbours, α ≥ 1.25", &hood);
    c.check("negative control α = 0.5 is not convexifiable", &control);
    c
}

fn cli_determinism() -> Criterion {
    let mut c = Criterion::new(7, "CLI full-suite determinism");
    let runs: Vec<_> = (0..2)
        .map(|_| {
            Command::new(env!("CARGO_BIN_EXE_qcx"))
                .args(["--mode", "full-suite", "--seed", "1729", "--format", "json"])
                .env_remove("QCX_SEED")
                .output()
                .expect("qcx runs")
        })
        .collect();
    let identical = runs[0].stdout == runs[1].stdout && !runs[0].stdout.is_empty();
    c.line(
        identical,
        format!("byte-identical JSON ({} bytes)", runs[0].stdout.len()),
    );
    for (i, r) in runs.iter().enumerate() {
        let code = r.status.code();
        c.line(
            code == Some(0),
            format!("run {} exit status {code:?}", i + 1),
        );
    }
    c
}

fn main() {
    let tol = Tolerances::default();
    let criteria = [
        derivatives(&tol),
        quasiconvexity(&tol),
        determinant(&tol),
        certificates(&tol),
        alpha_one(&tol),
        lambda(&tol),
        cli_determinism(),
    ];
    for c in &criteria {
        c.print();
    }
    let failed: Vec<String> = criteria
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.id.to_string())
        .collect();
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}
