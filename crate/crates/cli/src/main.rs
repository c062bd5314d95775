//! `pscom`: solve, sweep and oracle-check front end.
//!
//! Exit codes: 0 ok, 1 invalid arguments or configuration, 2 infeasible
//! instance, 3 I/O failure, 4 oracle violation.

// `!(x >= 0.0)` is used on purpose so NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pscom_core::experiments::{
    emit_plot, export_csv, method2_candidate_count, run_scenario, run_sweep, scenario_result, ExperimentError,
    ExportOptions, MethodRun, RunOptions, Scenario, ScenarioConfig, SweepParam, SweepSpec, METHOD2_WARN_CANDIDATES,
};
use pscom_core::solvers::Method;

const EXIT_CONFIG: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "pscom", version, about = "Max-min fair power allocation for semantic uplinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario with every selected method.
    Solve(SolveArgs),
    /// Sweep one parameter and write CSVs plus an SVG plot.
    Sweep(SweepArgs),
    /// Compare Method-1 and Method-2 against the refined-grid oracle (N <= 3).
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Comma-separated methods; defaults to the config's list.
    #[arg(long, value_name = "LIST", value_delimiter = ',', value_parser = parse_method)]
    method: Option<Vec<Method>>,
    /// Run Method-2 past the candidate-count limit.
    #[arg(long)]
    force: bool,
    /// Worker threads for the solver loops.
    #[arg(long, value_name = "N", env = "PSCOM_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

#[derive(Debug, Args)]
struct Output {
    /// Directory for CSV (and SVG) output.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Record measured wall times in summary.csv (makes files run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    Pmax,
    Users,
    Noise,
}

impl From<ParamArg> for SweepParam {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Pmax => SweepParam::PMax,
            ParamArg::Users => SweepParam::NUsers,
            ParamArg::Noise => SweepParam::NoisePower,
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    output: Output,
    /// Parameter to sweep (noise values are in dBm).
    #[arg(long, value_enum)]
    param: ParamArg,
    /// Comma-separated, strictly monotone sweep values.
    #[arg(long, value_name = "CSV", value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Interior grid points per curve segment; defaults to the config value.
    #[arg(long, value_name = "K")]
    points: Option<usize>,
    /// Worker threads for the solver loops.
    #[arg(long, value_name = "N", env = "PSCOM_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.trim().parse()
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_scenario(path: &Path, methods: Option<Vec<Method>>) -> Result<Scenario, Failure> {
    if !path.is_file() {
        return Err(Failure::config(format!("config file {} does not exist", path.display())));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) })?;
    let mut config =
        ScenarioConfig::from_toml(&text).map_err(|e| Failure::config(format!("invalid configuration: {e}")))?;
    if let Some(methods) = methods {
        config.methods.clear();
        for m in methods {
            if !config.methods.contains(&m) {
                config.methods.push(m);
            }
        }
    }
    config.resolve().map_err(|e| Failure::config(format!("invalid configuration: {e}")))
}

fn run_options(common: &Common) -> RunOptions {
    RunOptions { jobs: common.jobs.map(|j| j as usize), force: common.force }
}

fn warn_large_method2(scenario: &Scenario) {
    if !scenario.methods.contains(&Method::Method2) {
        return;
    }
    match method2_candidate_count(scenario) {
        Some(c) if c <= METHOD2_WARN_CANDIDATES => {}
        Some(c) => eprintln!("warning: method2 enumerates {c} candidate vectors"),
        None => eprintln!("warning: method2 candidate count overflows u64"),
    }
}

fn print_runs(label: Option<&str>, runs: &[MethodRun]) {
    for run in runs {
        let r = &run.report;
        let prefix = label.map(|l| format!("{l}  ")).unwrap_or_default();
        println!(
            "{prefix}{:<12} tau={:.6e} bps  power={:.6e} W  wall={:.3} ms{}",
            r.method.as_str(),
            r.tau_bps,
            r.allocation.total_power(),
            run.wall_ms,
            if r.feasible { "" } else { "  INFEASIBLE" }
        );
    }
}

fn infeasible(runs: &[MethodRun]) -> Vec<Method> {
    runs.iter().filter(|r| !r.report.feasible).map(|r| r.report.method).collect()
}

fn finish(infeasible: Vec<Method>) -> Result<u8, Failure> {
    if infeasible.is_empty() {
        return Ok(0);
    }
    let names: Vec<_> = infeasible.iter().map(|m| m.as_str()).collect();
    eprintln!("error: no feasible rate target found for {}", names.join(", "));
    Ok(EXIT_INFEASIBLE)
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(&args.common.config, args.common.method.clone())?;
    warn_large_method2(&scenario);
    let runs = run_scenario(&scenario, &run_options(&args.common))?;
    print_runs(None, &runs);
    let bad = infeasible(&runs);
    let results = vec![scenario_result("solve", &scenario, runs)];
    let paths = export_csv(&results, &args.output.out, &ExportOptions { timings: args.output.timings })?;
    eprintln!("wrote {} and {}", paths.summary.display(), paths.detail.display());
    finish(bad)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let scenario = load_scenario(&args.common.config, args.common.method.clone())?;
    let param = SweepParam::from(args.param);
    let spec =
        SweepSpec::new(param, args.values.clone()).map_err(|e| Failure::config(format!("invalid sweep: {e}")))?;
    for &v in spec.values() {
        let point = spec.apply(&scenario, v).map_err(|e| Failure::config(format!("invalid sweep: {e}")))?;
        warn_large_method2(&point);
    }
    let table = run_sweep(&scenario, &spec, &run_options(&args.common))?;
    let mut bad = Vec::new();
    for point in &table.points {
        print_runs(Some(&point.scenario_id), &point.runs);
        bad.extend(infeasible(&point.runs));
    }
    bad.sort();
    bad.dedup();
    let svg = args.output.out.join(format!("sweep_{}.svg", param.as_str()));
    let paths =
        export_csv(&table.clone().into_results(), &args.output.out, &ExportOptions { timings: args.output.timings })?;
    emit_plot(&table, &svg)?;
    eprintln!("wrote {}, {} and {}", paths.summary.display(), paths.detail.display(), svg.display());
    finish(bad)
}

fn cmd_oracle_check(args: OracleArgs) -> Result<u8, Failure> {
    let mut scenario = load_scenario(&args.config, Some(vec![Method::Method1, Method::Method2, Method::Oracle]))?;
    if let Some(k) = args.points {
        scenario.oracle_points_per_segment = k;
    }
    let opts = RunOptions { jobs: args.jobs.map(|j| j as usize), force: false };
    let runs = run_scenario(&scenario, &opts)?;
    let tau = |m: Method| runs.iter().find(|r| r.report.method == m).map(|r| r.report.tau_bps).unwrap_or(f64::NAN);
    let (m1, m2, oracle) = (tau(Method::Method1), tau(Method::Method2), tau(Method::Oracle));

    let mut knots_only = scenario.clone();
    knots_only.methods = vec![Method::Oracle];
    knots_only.oracle_points_per_segment = 0;
    let coarse = run_scenario(&knots_only, &opts)?[0].report.tau_bps;

    let eps = scenario.params.epsilon;
    println!("users={} points_per_segment={}", scenario.channel.n_users(), scenario.oracle_points_per_segment);
    println!("method1      tau={m1:.10e} bps  gap={:.6e} bps", oracle - m1);
    println!("method2      tau={m2:.10e} bps  gap={:.6e} bps", oracle - m2);
    println!("oracle       tau={oracle:.10e} bps");
    println!("oracle_knots tau={coarse:.10e} bps  rel_diff_to_method2={:.3e}", relative(coarse, m2));

    let mut violations = Vec::new();
    if !(oracle >= m1.max(m2) - eps) {
        violations
            .push(format!("oracle tau {oracle:.10e} below best heuristic {:.10e} by more than epsilon", m1.max(m2)));
    }
    if !(relative(coarse, m2) <= 1e-9) {
        violations.push(format!("knots-only oracle tau {coarse:.10e} differs from method2 {m2:.10e}"));
    }
    if violations.is_empty() {
        println!("oracle check passed");
        Ok(0)
    } else {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        Ok(EXIT_ORACLE)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
