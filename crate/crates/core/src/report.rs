//! Run configuration, the machine-readable report and its renderings.
//!
//! JSON is the canonical format. CSV is one row per check; text is a short
//! human summary. Field order is fixed by the struct definitions and maps are
//! `BTreeMap`, so identical runs serialize to identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::convexifiability::Certificate;
use crate::error::{Error, Result};
use crate::field::{Alpha, PointE};
use crate::harness::{CheckId, SampleInput};
use crate::lambda_search::LambdaResult;
use crate::sampling::SampleBox;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VerifyDerivatives,
    Quasiconvexity,
    Convexifiability,
    AlphaOne,
    LambdaSearch,
    FullSuite,
}

impl Mode {
    pub const SUITES: [Mode; 5] = [
        Mode::VerifyDerivatives,
        Mode::Quasiconvexity,
        Mode::Convexifiability,
        Mode::AlphaOne,
        Mode::LambdaSearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::VerifyDerivatives => "verify-derivatives",
            Mode::Quasiconvexity => "quasiconvexity",
            Mode::Convexifiability => "convexifiability",
            Mode::AlphaOne => "alpha-one",
            Mode::LambdaSearch => "lambda-search",
            Mode::FullSuite => "full-suite",
        }
    }

    /// Sampler stream for this suite, so a suite draws the same samples
    /// whether it runs alone or inside `full-suite`.
    pub fn stream(self) -> u64 {
        self as u64 + 1
    }

    pub fn default_alphas(self) -> Vec<f64> {
        match self {
            Mode::Quasiconvexity => vec![0.25, 0.5, 1.0, 1.5, 2.0],
            Mode::Convexifiability => vec![0.25, 0.5, 0.75, 0.9],
            Mode::AlphaOne => vec![1.0],
            Mode::LambdaSearch => vec![1.05, 1.1, 1.25, 1.5, 2.0, 3.0],
            Mode::VerifyDerivatives | Mode::FullSuite => vec![],
        }
    }

    pub fn default_box(self) -> SampleBox {
        let (lo, hi) = match self {
            Mode::VerifyDerivatives => (0.1, 10.0),
            Mode::Quasiconvexity => (0.05, 20.0),
            _ => (0.25, 4.0),
        };
        SampleBox { lo, hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// gradient vs central differences, relative
    pub grad: f64,
    /// Hessian vs central differences, relative to `1 + ‖D²u‖_F`
    pub hess: f64,
    /// absolute bound on the finite-difference `u_xy`
    pub hess_zero: f64,
    /// certificate and indefiniteness tolerance, relative
    pub cert: f64,
    /// bisection width for the λ search, relative
    pub bisection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            grad: 1e-6,
            hess: 1e-4,
            hess_zero: 1e-6,
            cert: 1e-10,
            bisection: 1e-6,
        }
    }
}

pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    /// empty means the per-suite default ladder
    pub alphas: Vec<f64>,
    pub point: Option<[f64; 3]>,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub format: OutputFormat,
    /// `None` means the per-suite default box
    pub sample_box: Option<SampleBox>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::FullSuite,
            alphas: vec![],
            point: None,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            format: OutputFormat::Json,
            sample_box: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Precondition("samples must be at least 1".into()));
        }
        for &a in &self.alphas {
            Alpha::new(a)?;
        }
        if let Some([x, y, z]) = self.point {
            PointE::new(x, y, z)?;
        }
        if let Some(b) = self.sample_box {
            SampleBox::new(b.lo, b.hi)?;
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tol-grad", t.grad),
            ("tol-hess", t.hess),
            ("tol-hess-zero", t.hess_zero),
            ("tol-cert", t.cert),
            ("bisection", t.bisection),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Precondition(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if t.bisection >= 1.0 {
            return Err(Error::Precondition(
                "bisection tolerance must be < 1".into(),
            ));
        }
        Ok(())
    }

    pub fn point(&self) -> Option<PointE> {
        self.point
            .map(|[x, y, z]| PointE::new(x, y, z).expect("validated point"))
    }

    pub fn alphas_for(&self, mode: Mode) -> Vec<f64> {
        if self.alphas.is_empty() {
            mode.default_alphas()
        } else {
            self.alphas.clone()
        }
    }

    pub fn box_for(&self, mode: Mode) -> SampleBox {
        self.sample_box.unwrap_or_else(|| mode.default_box())
    }
}

/// One failing sample, with everything needed to re-evaluate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub index: usize,
    pub input: SampleInput,
    pub value: Option<f64>,
    pub error: Option<String>,
}

pub const MAX_FAILURE_RECORDS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: Mode,
    pub check: CheckId,
    pub description: String,
    pub passed: bool,
    pub samples: usize,
    pub failures: usize,
    pub limit: f64,
    /// largest measured value over the samples, `None` if every sample errored
    pub worst_value: Option<f64>,
    pub worst_input: Option<SampleInput>,
    pub failure_records: Vec<FailureRecord>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRecord {
    pub point: PointE,
    pub alpha: Alpha,
    /// outcome of the tangent-plane route, as attempted
    pub tangent_route: String,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaRecord {
    pub point: PointE,
    pub alpha: Alpha,
    pub result: Option<LambdaResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    pub certificates: Vec<CertificateRecord>,
    pub lambda_results: Vec<LambdaRecord>,
    pub worst_residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let io = |e: csv::Error| Error::Precondition(format!("csv: {e}"));
        w.write_record([
            "suite",
            "check",
            "passed",
            "samples",
            "failures",
            "worst_value",
            "limit",
        ])
        .map_err(io)?;
        for c in &self.checks {
            w.write_record([
                c.suite.name().to_string(),
                c.check.name().to_string(),
                c.passed.to_string(),
                c.samples.to_string(),
                c.failures.to_string(),
                c.worst_value.map(|v| format!("{v:e}")).unwrap_or_default(),
                format!("{:e}", c.limit),
            ])
            .map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Precondition(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "qcx {} mode={} seed={} samples={}",
            self.version,
            self.config.mode.name(),
            self.config.seed,
            self.config.samples
        );
        for c in &self.checks {
            let worst = c
                .worst_value
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{} {}/{}: {} samples, {} failures, worst {} (limit {:.1e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite.name(),
                c.check.name(),
                c.samples,
                c.failures,
                worst,
                c.limit
            );
        }
        for r in &self.lambda_results {
            match (&r.result, &r.error) {
                (Some(l), _) => {
                    let _ = writeln!(s, "lambda_min(alpha={}) = {:e}", r.alpha, l.lambda_min);
                }
                (None, Some(e)) => {
                    let _ = writeln!(s, "lambda_min(alpha={}): {e}", r.alpha);
                }
                _ => {}
            }
        }
        let _ = writeln!(
            s,
            "{}",
            if self.passed {
                "all checks passed"
            } else {
                "some checks FAILED"
            }
        );
        s
    }

    pub fn render(&self) -> Result<String> {
        match self.config.format {
            OutputFormat::Json => Ok(self.to_json()),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Text => Ok(self.to_text()),
        }
    }
}
