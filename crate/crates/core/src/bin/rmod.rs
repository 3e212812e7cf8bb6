use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rmod::engine::{Trace, TraceSummary};
use rmod::experiment::{run_experiment, run_suite, ExperimentConfig, ProblemContext, SuiteOptions, TRACE_CHECKS};
use rmod::harness::Status;
use rmod::problems::problem;
use rmod::{Error, Result};

/// Overrides the output directory of every subcommand.
const OUT_ENV: &str = "RMOD_OUT_DIR";

#[derive(Parser)]
#[command(name = "rmod", version, about = "Multiobjective steepest descent on Riemannian manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON configuration.
    Solve { config: PathBuf },
    /// Run every shipped problem with every direction mode and step rule.
    Suite {
        /// Only problems whose id contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write SVG plots.
        #[arg(long)]
        plots: bool,
    },
    /// Re-run trace checks on a saved trace (reads the sibling .json summary).
    Check {
        trace: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        checks: Vec<String>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Evaluate the merit estimate at a point given as comma-separated coordinates.
    Phi {
        problem: String,
        #[arg(allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
    },
}

fn out_dir(fallback: Option<PathBuf>) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .or(fallback)
        .unwrap_or_else(|| PathBuf::from("rmod-out"))
}

fn solve(path: &Path) -> Result<i32> {
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Ok(2);
        }
    };
    cfg.output_dir = Some(out_dir(cfg.output_dir.take()));
    let out = run_experiment(&cfg)?;
    for p in &out.probes {
        println!("probe {:<20} {}", p.check, p.status.as_str());
    }
    for r in &out.runs {
        let s = r.trace.summary();
        println!(
            "{}: {:?} after {} iterations, |v| = {:e}",
            r.label, s.termination, s.iterations, s.final_norm_v
        );
        if let Some(e) = &s.error {
            println!("  error: {e}");
        }
        for c in &r.checks {
            println!("  {:<20} {}", c.check, c.status.as_str());
        }
    }
    println!("outputs in {}", cfg.output_dir.as_ref().map_or("-".into(), |d| d.display().to_string()));
    Ok(out.exit_code())
}

fn suite(filter: Option<String>, seed: u64, plots: bool) -> Result<i32> {
    let dir = out_dir(None);
    let report = run_suite(&SuiteOptions { filter, seed, output_dir: Some(dir.clone()), plots, ..SuiteOptions::default() })?;
    for p in &report.problems {
        println!("{}: {} runs", p.problem.id, p.runs.len());
    }
    println!("status counts: {:?}", report.status_counts);
    for f in &report.failures {
        println!("FAIL {f}");
    }
    for e in &report.errors {
        println!("ERROR {e}");
    }
    println!("report in {}", dir.join("suite.json").display());
    Ok(report.exit_code())
}

fn check(trace_path: &Path, checks: Vec<String>, beta: Option<f64>, r_max: Option<f64>) -> Result<i32> {
    let checks = if checks.is_empty() { TRACE_CHECKS.iter().map(|s| s.to_string()).collect() } else { checks };
    if let Some(bad) = checks.iter().find(|c| !TRACE_CHECKS.contains(&c.as_str())) {
        eprintln!("unknown check `{bad}`");
        return Ok(2);
    }
    let summary: TraceSummary = serde_json::from_str(&fs::read_to_string(trace_path.with_extension("json"))?)?;
    let mut trace = Trace::read_csv(fs::File::open(trace_path)?, &summary)?;
    if let Some(b) = beta {
        trace.config.beta = b;
    }
    if let Some(r) = r_max {
        trace.config.r_max = r;
    }
    if let Err(e) = trace.config.validate() {
        eprintln!("{e}");
        return Ok(2);
    }
    let ctx = ProblemContext::build(problem(&summary.problem)?, trace.config.phi_resolution, trace.config.seed)?;
    let (reports, _) = ctx.check_trace(&trace, &checks)?;
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(if reports.iter().any(|r| matches!(r.status, Status::Fail | Status::Inconclusive)) { 1 } else { 0 })
}

fn phi(id: &str, point: &str, resolution: f64) -> Result<i32> {
    let prob = problem(id)?;
    let coords = point
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad coordinate `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    let p = rmod::geometry::ManifoldPoint::from_slice(prob.manifold(), &coords)?;
    let oracle = prob.oracle(resolution)?;
    let value = oracle.phi(&prob.objective, &p)?;
    println!(
        "{}",
        serde_json::json!({ "problem": id, "point": coords, "phi": value, "slack": oracle.slack(), "exact": oracle.is_exact() })
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config } => solve(&config),
        Command::Suite { filter, seed, plots } => suite(filter, seed, plots),
        Command::Check { trace, checks, beta, r_max } => check(&trace, checks, beta, r_max),
        Command::Phi { problem, point, resolution } => phi(&problem, &point, resolution),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_)
                | Error::UnknownProblem(_)
                | Error::InvalidArgument(_)
                | Error::ConstraintViolation { .. }
                | Error::DimensionMismatch { .. } => 2,
                _ => 3,
            })
        }
    }
}
