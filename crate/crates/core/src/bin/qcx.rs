use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use qcx::harness::run;
use qcx::report::{Mode, OutputFormat, RunConfig, Tolerances, DEFAULT_SAMPLES};
use qcx::sampling::SampleBox;

/// Numerical verification of a quasi-convex function that no smooth strictly
/// monotone transformation makes convex.
#[derive(Debug, Parser)]
#[command(name = "qcx", version)]
struct Cli {
    /// Suite to run
    #[arg(long, value_enum, default_value = "full-suite")]
    mode: Mode,

    /// Exponent α; repeat the flag or give a comma ladder. Defaults per suite:
    /// quasiconvexity 0.25,0.5,1,1.5,2; convexifiability 0.25,0.5,0.75,0.9;
    /// alpha-one 1; lambda-search 1.05,1.1,1.25,1.5,2,3; verify-derivatives U[0.1,3]
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,

    /// Fixed point x,y,z instead of sampled points
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    point: Option<[f64; 3]>,

    /// Samples per check
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,

    /// RNG seed
    #[arg(long, env = "QCX_SEED", default_value_t = qcx::report::DEFAULT_SEED)]
    seed: u64,

    /// Gradient tolerance, relative
    #[arg(long, default_value_t = Tolerances::default().grad)]
    tol_grad: f64,

    /// Hessian tolerance, relative to 1 + ‖D²u‖_F
    #[arg(long, default_value_t = Tolerances::default().hess)]
    tol_hess: f64,

    /// Absolute tolerance on the finite-difference u_xy
    #[arg(long, default_value_t = Tolerances::default().hess_zero)]
    tol_hess_zero: f64,

    /// Certificate tolerance, relative
    #[arg(long, default_value_t = Tolerances::default().cert)]
    tol_cert: f64,

    /// Bisection width for the λ search, relative
    #[arg(long, default_value_t = Tolerances::default().bisection)]
    tol_bisection: f64,

    /// Coordinate range lo,hi for sampled points. Defaults per suite:
    /// verify-derivatives 0.1,10; quasiconvexity 0.05,20; others 0.25,4
    #[arg(long = "box", value_parser = parse_box)]
    sample_box: Option<SampleBox>,

    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,

    /// Add wall time to the report (breaks byte-identical output)
    #[arg(long)]
    timing: bool,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let v = parse_floats(s)?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected x,y,z, got {} values", v.len()))
}

fn parse_box(s: &str) -> Result<SampleBox, String> {
    match parse_floats(s)?.as_slice() {
        &[lo, hi] => SampleBox::new(lo, hi).map_err(|e| e.to_string()),
        v => Err(format!("expected lo,hi, got {} values", v.len())),
    }
}

impl Cli {
    fn config(&self) -> RunConfig {
        RunConfig {
            mode: self.mode,
            alphas: self.alpha.clone(),
            point: self.point,
            samples: self.samples,
            seed: self.seed,
            tolerances: Tolerances {
                grad: self.tol_grad,
                hess: self.tol_hess,
                hess_zero: self.tol_hess_zero,
                cert: self.tol_cert,
                bisection: self.tol_bisection,
            },
            format: self.format,
            sample_box: self.sample_box,
        }
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}\n");
    eprintln!("{}", Cli::command().render_usage());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli.config(), cli.timing) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let rendered = match report.render() {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                return usage_error(format!("{}: {e}", path.display()));
            }
        }
        None => print!("{rendered}"),
    }
    if !report.passed {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!(
                "FAIL {}/{}: {} of {} samples",
                c.suite.name(),
                c.check.name(),
                c.failures,
                c.samples
            );
            if let Some(r) = c.failure_records.first() {
                eprintln!(
                    "  {}",
                    serde_json::to_string(r).expect("record is serializable")
                );
            }
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
