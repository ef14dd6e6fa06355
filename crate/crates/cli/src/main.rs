use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use altproj::certify;
use altproj::descriptor::{LpDescriptor, SetDescriptor};
use altproj::engine::{self, Certificate, RunOptions, StopReason};
use altproj::fixtures;
use altproj::lp::{self, AlphaRule, Strategy};
use altproj::verify::{self, VerifyConfig};
use altproj::{EpigraphKind, Error, Point, ProjectableSet};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_NOT_POLYHEDRAL: u8 = 65;
const EXIT_BOUND_NOT_STRICT: u8 = 66;

#[derive(Parser)]
#[command(name = "altproj", version, about = "Alternating projections with finite-convergence certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run alternating projections from an experiment spec.
    Run {
        spec: PathBuf,
        /// Overrides the spec's max_iters.
        #[arg(long)]
        max_iters: Option<usize>,
        /// Directory for relative output paths (default: the spec's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the finite-convergence report for a half-space / polyhedron pair.
    Bound { problem: PathBuf },
    /// Solve a linear program by alternating projections.
    Lp {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Direct)]
        strategy: StrategyArg,
        /// Use M = (vertex-oracle optimum) − 1.
        #[arg(long)]
        auto_bound: bool,
        /// Angle constant for the shifted strategy: per row, or over active cones.
        #[arg(long, value_enum, default_value_t = AlphaArg::Rows)]
        alpha: AlphaArg,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, hide = true, default_value_t = 1.0)]
        alpha_scale: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Direct,
    Shifted,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaArg {
    Rows,
    Cones,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn error(e: Error) -> Self {
        let code = match e {
            Error::LowerBoundNotStrict => EXIT_BOUND_NOT_STRICT,
            _ => EXIT_ERROR,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Run { spec, max_iters, out } => cmd_run(&spec, max_iters, out.as_deref()),
        Command::Bound { problem } => cmd_bound(&problem),
        Command::Lp { problem, strategy, auto_bound, alpha } => cmd_lp(&problem, strategy, auto_bound, alpha),
        Command::Verify { suite, alpha_scale } => cmd_verify(&suite, alpha_scale),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("altproj: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn to_set(d: &SetDescriptor) -> std::result::Result<ProjectableSet, Failure> {
    d.to_set().map_err(|e| Failure::usage(format!("invalid set descriptor: {e}")))
}

fn to_point(v: &[f64]) -> std::result::Result<Point, Failure> {
    Point::new(v.to_vec()).map_err(|e| Failure::usage(format!("invalid x0: {e}")))
}

fn print_json<T: Serialize>(value: &T) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure { code: EXIT_ERROR, message: e.to_string() })?;
    println!("{text}");
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSpec {
    #[serde(rename = "setA")]
    set_a: SetDescriptor,
    #[serde(rename = "setB")]
    set_b: SetDescriptor,
    x0: Vec<f64>,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_cert_tol")]
    cert_tol: f64,
    #[serde(default)]
    outputs: Outputs,
}

fn default_max_iters() -> usize {
    1000
}

fn default_cert_tol() -> f64 {
    engine::DEFAULT_CERT_TOL
}

#[derive(Deserialize, Default)]
#[serde(untagged)]
enum Outputs {
    One(OutputPaths),
    Many(Vec<OutputPaths>),
    #[default]
    None,
}

#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct OutputPaths {
    trace_csv: Option<PathBuf>,
    report_json: Option<PathBuf>,
}

impl Outputs {
    fn paths(&self) -> Vec<OutputPaths> {
        match self {
            Outputs::One(p) => vec![p.clone()],
            Outputs::Many(ps) => ps.clone(),
            Outputs::None => Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    stop_reason: StopReason,
    steps_to_converge: Option<usize>,
    trace_length: usize,
    final_gap: Option<f64>,
    certificate: Option<&'a Certificate>,
}

fn cmd_run(spec_path: &Path, max_iters: Option<usize>, out: Option<&Path>) -> CmdResult {
    let spec: ExperimentSpec = read_json(spec_path)?;
    let a = to_set(&spec.set_a)?;
    let b = to_set(&spec.set_b)?;
    let x0 = to_point(&spec.x0)?;
    if a.dim() != b.dim() || x0.dim() != a.dim() {
        return Err(Failure::usage(format!("dimension mismatch: setA has {}, setB has {}, x0 has {}", a.dim(), b.dim(), x0.dim())));
    }
    let opts = RunOptions { max_iters: max_iters.unwrap_or(spec.max_iters), cert_tol: spec.cert_tol, ..RunOptions::default() };
    let trace = engine::run_with(&a, &b, &x0, &opts).map_err(Failure::error)?;
    let report = RunReport {
        stop_reason: trace.stop_reason,
        steps_to_converge: trace.steps_to_converge,
        trace_length: trace.len(),
        final_gap: trace.final_gap(),
        certificate: trace.certificate.as_ref(),
    };
    let report_text = serde_json::to_string_pretty(&report).map_err(|e| Failure { code: EXIT_ERROR, message: e.to_string() })?;

    let base = match out {
        Some(dir) => dir.to_path_buf(),
        None => spec_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut paths = spec.outputs.paths();
    if paths.is_empty() && out.is_some() {
        paths.push(OutputPaths { trace_csv: Some("trace.csv".into()), report_json: Some("report.json".into()) });
    }
    let write = |rel: &Path, contents: &str| -> std::result::Result<(), Failure> {
        let path = base.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Failure { code: EXIT_ERROR, message: format!("{}: {e}", parent.display()) })?;
        }
        fs::write(&path, contents).map_err(|e| Failure { code: EXIT_ERROR, message: format!("{}: {e}", path.display()) })
    };
    let csv = trace.to_csv();
    for p in &paths {
        if let Some(rel) = &p.trace_csv {
            write(rel, &csv)?;
        }
        if let Some(rel) = &p.report_json {
            write(rel, &format!("{report_text}\n"))?;
        }
    }
    println!("{report_text}");
    Ok(match trace.stop_reason {
        StopReason::Certified => EXIT_OK,
        StopReason::GapStalled | StopReason::MaxIters => EXIT_NOT_CONVERGED,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundProblem {
    #[serde(rename = "setA")]
    set_a: SetDescriptor,
    #[serde(rename = "setB")]
    set_b: SetDescriptor,
    x0: Vec<f64>,
}

fn cmd_bound(path: &Path) -> CmdResult {
    let problem: BoundProblem = read_json(path)?;
    let not_polyhedral = |what: &str| Failure { code: EXIT_NOT_POLYHEDRAL, message: format!("not a polyhedron / half-space pair: {what}") };
    let a = match to_set(&problem.set_a)? {
        ProjectableSet::HalfSpace(h) => h,
        _ => return Err(not_polyhedral("setA must be a half-space")),
    };
    let b = match to_set(&problem.set_b)? {
        ProjectableSet::Polyhedron(p) => p,
        ProjectableSet::HalfSpace(h) => h.to_polyhedron(),
        ProjectableSet::Epigraph(e) if e.kind() == EpigraphKind::AbsValue => e.to_polyhedron().expect("abs epigraph is polyhedral"),
        ProjectableSet::Epigraph(_) => return Err(not_polyhedral("setB is the epigraph of x²")),
    };
    let x0 = to_point(&problem.x0)?;
    if a.dim() != b.dim() || x0.dim() != a.dim() {
        return Err(Failure::usage("dimension mismatch between setA, setB and x0"));
    }
    let report = certify::polyhedral_report(&a, &b, &x0).map_err(Failure::error)?;
    print_json(&report)?;
    Ok(EXIT_OK)
}

fn cmd_lp(path: &Path, strategy: StrategyArg, auto_bound: bool, alpha: AlphaArg) -> CmdResult {
    let d: LpDescriptor = read_json(path)?;
    let lower_bound = if auto_bound {
        let poly = d.polyhedron().map_err(|e| Failure::usage(e.to_string()))?;
        let c = d.objective().map_err(|e| Failure::usage(e.to_string()))?;
        Some(lp::vertex_oracle(&poly, &c).map_err(Failure::error)?.optimum - 1.0)
    } else {
        None
    };
    let problem = d.to_problem(lower_bound).map_err(|e| Failure::usage(e.to_string()))?;
    let strategy = match strategy {
        StrategyArg::Direct => Strategy::DirectAP,
        StrategyArg::Shifted => Strategy::ShiftedOneStep,
    };
    let rule = match alpha {
        AlphaArg::Rows => AlphaRule::RowWise,
        AlphaArg::Cones => AlphaRule::ActiveCones,
    };
    let outcome = lp::solve_lp_with(&problem, None, strategy, rule).map_err(Failure::error)?;
    print_json(&outcome)?;
    Ok(EXIT_OK)
}

fn cmd_verify(suite: &str, alpha_scale: f64) -> CmdResult {
    let cfg = VerifyConfig { seed: fixtures::seed_from_env(), alpha_scale, ..VerifyConfig::default() };
    let results = verify::run_suite(suite, &cfg)
        .ok_or_else(|| Failure::usage(format!("unknown suite {suite:?}; expected one of all, {}", verify::SUITES.join(", "))))?;
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for r in &results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!("{status}  {:width$}  {:>5} cases  {:>4} failures", r.name, r.cases, r.failures);
        if !r.passed() {
            failed += 1;
            println!("      first failure: {}", r.detail);
        }
    }
    println!("{} checks, {} failed (seed {})", results.len(), failed, cfg.seed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_ERROR })
}
