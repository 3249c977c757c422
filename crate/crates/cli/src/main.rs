use std::path::{Path, PathBuf};
use std::process::ExitCode;

use auglag_core::complexity::{fit_growth, sweep, sweep_csv, GrowthModel, SweepResult};
use auglag_core::config::{ConfigError, MonitorMode, SolverConfig};
use auglag_core::inner::InnerMethod;
use auglag_core::lagrangian::PenaltyPolicy;
use auglag_core::outer::{solve, write_outputs, OutputFormat, RunReport, SolveError, Termination};
use auglag_core::problem::{corpus, file, validate, ProblemSpec};
use auglag_core::selftest;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_SOLVER_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_MONITOR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "auglag", version, about = "Augmented Lagrangian solver with complexity certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and write its run report.
    Solve(SolveArgs),
    /// Solve over a grid of tolerances and fit growth laws.
    Sweep(SweepArgs),
    /// Validate a problem's derivatives and run inner-solver self-tests.
    Check(CheckArgs),
    /// List the built-in problems.
    ListProblems {
        /// Dimension of the listed instances.
        #[arg(long, default_value_t = corpus::DEFAULT_DIMENSION)]
        dimension: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PenaltyArg {
    Polynomial,
    Geometric,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InnerArg {
    #[value(name = "gd-fixed")]
    GdFixed,
    #[value(name = "gd-backtracking")]
    GdBacktracking,
    Cubic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MonitorArg {
    Strict,
    Record,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Corpus name (e.g. simplex-cos-8) or path to a JSON problem file.
    #[arg(long)]
    problem: String,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma0: Option<f64>,
    #[arg(long, value_enum)]
    penalty: Option<PenaltyArg>,
    /// Inner solver; chosen from the problem structure when omitted.
    #[arg(long, value_enum)]
    inner: Option<InnerArg>,
    #[arg(long)]
    max_outer: Option<usize>,
    #[arg(long, value_enum)]
    monitor: Option<MonitorArg>,
    /// JSON file with solver configuration fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for randomized checks. Solves are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: ConfigArgs,
    #[arg(long, default_value = "run.json")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Comma-separated tolerances in (0, 1).
    #[arg(long, value_delimiter = ',', required = true)]
    eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Base path of the sweep CSV and JSON summary.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional JSON file for the check results.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error carrying the process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn solver(message: impl Into<String>) -> Self {
        Self { code: EXIT_SOLVER_FAILURE, message: message.into() }
    }
}

fn init_logging() {
    let level = match std::env::var("AUGLAG_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("trace") => log::LevelFilter::Trace,
        Ok(other) => {
            eprintln!("warning: ignoring AUGLAG_LOG={other} (expected quiet, info or trace)");
            log::LevelFilter::Warn
        }
        Err(_) => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn load_problem(problem_ref: &str) -> Result<ProblemSpec, Failure> {
    file::resolve(problem_ref).map_err(|e| Failure::usage(e.to_string()))
}

fn build_config(args: &ConfigArgs) -> Result<SolverConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => SolverConfig::load(path).map_err(|e| Failure::usage(e.to_string()))?,
        None => SolverConfig::default(),
    };
    if let Some(v) = args.eps {
        config.eps = v;
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.gamma {
        config.gamma = v;
    }
    if let Some(v) = args.sigma0 {
        config.sigma0 = v;
    }
    if let Some(v) = args.max_outer {
        config.max_outer = v;
    }
    if let Some(p) = args.penalty {
        config.penalty_policy = match p {
            PenaltyArg::Polynomial => PenaltyPolicy::PolynomialGrowth,
            PenaltyArg::Geometric => PenaltyPolicy::GeometricGrowth,
        };
    }
    if let Some(i) = args.inner {
        config.inner = Some(match i {
            InnerArg::GdFixed => InnerMethod::FixedStepGd,
            InnerArg::GdBacktracking => InnerMethod::BacktrackingGd,
            InnerArg::Cubic => InnerMethod::CubicNewton,
        });
    }
    if let Some(m) = args.monitor {
        config.monitor = match m {
            MonitorArg::Strict => MonitorMode::Strict,
            MonitorArg::Record => MonitorMode::Record,
        };
    }
    config.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(config)
}

fn output_format(f: FormatArg) -> OutputFormat {
    match f {
        FormatArg::Json => OutputFormat::Json,
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Both => OutputFormat::Both,
    }
}

fn write_report(report: &RunReport, out: &Path, format: FormatArg) -> Result<(), Failure> {
    let paths = write_outputs(report, out, output_format(format))
        .map_err(|e| Failure::solver(format!("cannot write report: {e}")))?;
    for p in paths {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn summary_line(report: &RunReport) -> String {
    let last = report.final_state();
    let theta = last.theta.map_or_else(|| "-".to_string(), |t| format!("{:e}", t.value));
    format!(
        "terminated={:?} T_outer={} total_inner={} dual_inf={:e} theta_final={} sigma_final={:e}",
        report.terminated, report.t_outer, report.total_inner, report.kkt.dual_inf, theta, last.sigma
    )
}

fn run_solve(args: &SolveArgs) -> Result<(), Failure> {
    let problem = load_problem(&args.common.problem)?;
    let config = build_config(&args.common)?;
    config
        .resolve_inner(&problem)
        .map_err(|e| Failure::usage(e.to_string()))?;
    match solve(&problem, &config) {
        Ok(report) => {
            write_report(&report, &args.out, args.format)?;
            println!("{}", summary_line(&report));
            match report.terminated {
                Termination::EpsKKT => Ok(()),
                other => Err(Failure::solver(format!(
                    "solve ended with {other:?}{}",
                    report.failure.as_deref().map(|f| format!(": {f}")).unwrap_or_default()
                ))),
            }
        }
        Err(SolveError::MonitorViolation { record, report }) => {
            write_report(&report, &args.out, args.format)?;
            println!("{}", summary_line(&report));
            Err(Failure {
                code: EXIT_MONITOR,
                message: format!(
                    "monitor `{}` failed at iteration {}: lhs {:e}, rhs {:e}",
                    record.check, record.iteration, record.lhs, record.rhs
                ),
            })
        }
        Err(SolveError::Config(e @ (ConfigError::Invalid(_) | ConfigError::Inapplicable { .. }))) => {
            Err(Failure::usage(e.to_string()))
        }
        Err(e) => Err(Failure::solver(e.to_string())),
    }
}

fn fit_json(result: &SweepResult, model: GrowthModel) -> serde_json::Value {
    match fit_growth(result, model) {
        Ok(fit) => serde_json::to_value(fit).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn run_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let problem = load_problem(&args.common.problem)?;
    let config = build_config(&args.common)?;
    config
        .resolve_inner(&problem)
        .map_err(|e| Failure::usage(e.to_string()))?;
    if args.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    let result = sweep(&problem, &config, &args.eps_grid, args.jobs).map_err(|e| Failure::usage(e.to_string()))?;
    let csv_text = sweep_csv(&result).map_err(|e| Failure::solver(e.to_string()))?;
    let csv_path = args.out.with_extension("csv");
    let json_path = args.out.with_extension("json");
    let summary = json!({
        "problem": problem.name,
        "config": config,
        "rows": result.rows,
        "fits": {
            "outer_log_linear": fit_json(&result, GrowthModel::LogLinear),
            "inner_power_law": fit_json(&result, GrowthModel::PowerLaw),
        },
    });
    let mut json_text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json_text.push('\n');
    std::fs::write(&csv_path, csv_text).map_err(|e| Failure::solver(format!("{}: {e}", csv_path.display())))?;
    std::fs::write(&json_path, json_text).map_err(|e| Failure::solver(format!("{}: {e}", json_path.display())))?;
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    let certified = result.rows.iter().filter(|r| r.certified).count();
    println!("rows={} certified={} failed={}", result.rows.len(), certified, failed);
    if failed > 0 {
        return Err(Failure::solver(format!("{failed} sweep rows failed")));
    }
    Ok(())
}

fn run_check(args: &CheckArgs) -> Result<(), Failure> {
    let problem = load_problem(&args.problem)?;
    let report = validate(&problem, args.samples, args.seed).map_err(|e| Failure::usage(e.to_string()))?;
    let selftests = selftest::run_all(&problem, args.seed);
    for c in &report.checks {
        println!("{} {} worst={:e} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.worst_error, c.detail);
    }
    for t in &selftests {
        println!("{} {} {}", if t.passed { "PASS" } else { "FAIL" }, t.name, t.detail);
    }
    if let Some(out) = &args.out {
        let value = json!({ "validation": report, "self_tests": selftests });
        let mut text = serde_json::to_string_pretty(&value).expect("check serializes");
        text.push('\n');
        std::fs::write(out, text).map_err(|e| Failure::solver(format!("{}: {e}", out.display())))?;
    }
    if report.passed() && selftests.iter().all(|t| t.passed) {
        Ok(())
    } else {
        Err(Failure::solver("checks failed"))
    }
}

fn list_problems(dimension: usize) -> Result<(), Failure> {
    let mut problems = Vec::new();
    for family in corpus::FAMILIES {
        let name = format!("{family}-{dimension}");
        problems.push(corpus::by_name(&name).map_err(|e| Failure::usage(e.to_string()))?);
    }
    problems.push(corpus::eq_qp(4).expect("built-in problem"));
    for p in problems {
        println!("{} n={} m={} m_e={}", p.name, p.n(), p.m(), p.m_e());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Check(args) => run_check(args),
        Command::ListProblems { dimension } => list_problems(*dimension),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
