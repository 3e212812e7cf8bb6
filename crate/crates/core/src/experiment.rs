//! Experiment configuration, per-problem probes, trace checks, the full
//! suite, and on-disk outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direction::DirectionMode;
use crate::engine::{run_with_merit, RunConfig, StepSizeRule, Termination, Trace};
use crate::error::{Error, Result};
use crate::geometry::{sample_in_ball, Manifold, ManifoldPoint};
use crate::harness::{self, CheckReport, KlEstimate, Status};
use crate::merit::MeritOracle;
use crate::plot::trace_svg;
use crate::problems::{problem, shipped_problems, Problem, ProblemInfo};

/// Names accepted in [`ExperimentConfig::checks`].
pub const TRACE_CHECKS: [&str; 10] = [
    "monotone",
    "step_bound",
    "movement",
    "sufficient_decrease",
    "cluster_criticality",
    "phi_descent",
    "summability",
    "armijo_lower_bound",
    "linear_rate",
    "quasi_fejer",
];

/// Radius ladder of the sublevel-boundedness probe. Curved spaces stop at 8,
/// where ambient coordinates are still accurate to the constraint tolerance.
pub fn sublevel_ladder(m: Manifold) -> &'static [f64] {
    match m {
        Manifold::Euclidean { .. } => &[0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        _ => &[0.5, 1.0, 2.0, 4.0, 8.0],
    }
}

/// Start points of an experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPoints {
    /// The problem's default start.
    #[default]
    Default,
    Explicit(Vec<Vec<f64>>),
    /// Uniform draws from the problem's start ball.
    Sampled { count: usize, seed: u64 },
}

fn default_rule() -> StepSizeRule {
    StepSizeRule::Armijo { nu: 0.5 }
}
fn default_checks() -> Vec<String> {
    TRACE_CHECKS.iter().map(|s| s.to_string()).collect()
}
fn default_true() -> bool {
    true
}

/// JSON experiment description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: String,
    #[serde(default)]
    pub label: Option<String>,
    /// Missing `tol_critical` defaults to the problem's value.
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default = "default_rule")]
    pub step_rule: StepSizeRule,
    #[serde(default)]
    pub initial_points: InitialPoints,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub plots: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let id = value
            .get("problem")
            .and_then(|p| p.as_str())
            .ok_or_else(|| Error::Config("missing string field `problem`".into()))?;
        let prob = problem(id).map_err(|e| Error::Config(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("configuration must be a JSON object".into()))?;
        let run = obj.entry("run").or_insert_with(|| serde_json::json!({}));
        if let Some(run) = run.as_object_mut() {
            run.entry("tol_critical").or_insert(serde_json::json!(prob.tol_critical));
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        problem(&self.problem).map_err(|e| Error::Config(e.to_string()))?;
        self.run.validate()?;
        self.step_rule.validate(&self.run)?;
        for c in &self.checks {
            if !TRACE_CHECKS.contains(&c.as_str()) {
                return Err(Error::Config(format!("unknown check `{c}`")));
            }
        }
        if let InitialPoints::Sampled { count: 0, .. } = self.initial_points {
            return Err(Error::Config("sampled initial points need count >= 1".into()));
        }
        if let InitialPoints::Explicit(pts) = &self.initial_points {
            if pts.is_empty() {
                return Err(Error::Config("explicit initial points are empty".into()));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.problem.clone())
    }
}

/// Start points for a problem.
pub fn initial_points(prob: &Problem, spec: &InitialPoints) -> Result<Vec<ManifoldPoint>> {
    match spec {
        InitialPoints::Default => Ok(vec![prob.default_start.clone()]),
        InitialPoints::Explicit(pts) => pts
            .iter()
            .map(|c| ManifoldPoint::from_slice(prob.manifold(), c).map_err(|e| Error::Config(format!("initial point: {e}"))))
            .collect(),
        InitialPoints::Sampled { count, seed } => {
            let mut r = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| sample_in_ball(&prob.start_ball.center, prob.start_ball.radius, &mut r))
                .collect()
        }
    }
}

/// Probe results and derived constants shared by every run on a problem.
#[derive(Clone, Debug)]
pub struct ProblemContext {
    pub problem: Problem,
    pub oracle: MeritOracle,
    pub probes: Vec<CheckReport>,
    pub kl: Option<KlEstimate>,
    /// Known KL constant, else the sampled estimate.
    pub alpha: Option<f64>,
    pub fejer_candidates: Vec<ManifoldPoint>,
}

impl ProblemContext {
    /// Builds the oracle and runs every applicable probe of the problem's
    /// declared flags.
    pub fn build(prob: Problem, resolution: f64, seed: u64) -> Result<Self> {
        let f = &prob.objective;
        let oracle = prob.oracle(resolution)?;
        let mut probes = vec![
            harness::probe_fd_gradient(f, &prob.start_ball, 200, seed ^ 0x11)?,
            harness::probe_order(f.len(), 200, seed ^ 0x12)?,
        ];
        if let Some(ball) = &prob.quasi_convex_ball {
            if prob.convex {
                probes.push(harness::probe_convexity(f, ball, 200, seed ^ 0x13)?);
            }
            probes.push(harness::probe_quasi_convexity(f, ball, 200, seed ^ 0x14)?);
            probes.push(harness::probe_prop1(f, ball, 200, seed ^ 0x15)?);
            probes.push(harness::probe_scalarization(f, ball, 100, seed ^ 0x16)?);
            if let Manifold::Hyperboloid { .. } = prob.manifold() {
                probes.push(harness::qc_distance_monte_carlo(f, ball, 1.0, 1000, seed ^ 0x17)?);
            }
        }
        if let Some(l) = prob.gradient_lipschitz {
            probes.push(harness::probe_gradient_lipschitz(f, &prob.start_ball, l, 200, seed ^ 0x18)?);
        }
        let mut kl = None;
        if let Some(ball) = &prob.kl_ball {
            let est = harness::estimate_kl(f, &oracle, ball, 2000, seed ^ 0x19)?;
            let mut rep = harness::kl_report(&est);
            if let (Some(known), Some(hat)) = (prob.known_alpha, est.alpha_hat) {
                rep.constants.insert("known_alpha".into(), known);
                if hat < known * (1.0 - 1e-9) {
                    rep.status = Status::Fail;
                    rep.detail = format!("sampled alpha {hat} is below the declared {known}");
                }
            }
            probes.push(rep);
            kl = Some(est);
        }
        if prob.coercive {
            probes.push(harness::check_sublevel_bounded(f, &prob.default_start, sublevel_ladder(prob.manifold()), 1000, seed ^ 0x1a)?);
        }
        probes.push(harness::probe_phi_lipschitz(f, &oracle, &prob.start_ball, 100, seed ^ 0x1b)?);
        let pareto = thin(prob.reference_points(resolution)?, 200);
        probes.push(harness::probe_weak_pareto(f, &oracle, &pareto)?);

        let alpha = prob.known_alpha.or_else(|| kl.as_ref().and_then(|k| k.alpha_hat));
        let mut fejer_candidates = Vec::new();
        if let Some(ball) = &prob.quasi_convex_ball {
            let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x1c);
            for _ in 0..300 {
                fejer_candidates.push(sample_in_ball(&ball.center, ball.radius, &mut r)?);
            }
            let refs = prob.reference_points(resolution)?.into_iter().filter(|q| ball.contains(q)).collect();
            fejer_candidates.extend(thin(refs, 200));
        }
        Ok(Self { problem: prob, oracle, probes, kl, alpha, fejer_candidates })
    }

    pub fn probe(&self, name: &str) -> Option<&CheckReport> {
        self.probes.iter().find(|r| r.check == name)
    }

    fn probe_blocks(&self, name: &str) -> Option<String> {
        match self.probe(name) {
            Some(r) if r.status != Status::Pass => Some(format!("probe {name} is {}", r.status.as_str())),
            _ => None,
        }
    }

    /// Runs the named trace checks. Checks whose premise probe did not pass
    /// are INCONCLUSIVE; checks the problem does not declare are SKIPPED.
    /// Also returns ρ from the rate check when it was computed.
    pub fn check_trace(&self, trace: &Trace, names: &[String]) -> Result<(Vec<CheckReport>, Option<f64>)> {
        let prob = &self.problem;
        let slack = self.oracle.slack();
        let mut out = Vec::with_capacity(names.len());
        let mut rho = None;
        for name in names {
            let rep = match name.as_str() {
                "monotone" => harness::check_monotone(trace),
                "step_bound" => harness::check_step_bound(trace),
                "movement" => harness::check_movement(trace)?,
                "sufficient_decrease" => harness::check_sufficient_decrease(trace),
                "cluster_criticality" => harness::check_cluster_criticality(trace),
                "phi_descent" | "summability" => {
                    if let Some(why) = self.probe_blocks("weak_pareto") {
                        CheckReport::inconclusive(name, why)
                    } else if name == "phi_descent" {
                        harness::check_phi_descent(trace, slack)
                    } else {
                        harness::check_summability(trace, slack)
                    }
                }
                "armijo_lower_bound" => {
                    if trace.armijo_nu.is_none() {
                        CheckReport::skipped(name, "not an Armijo run")
                    } else if let Some(why) = self.probe_blocks("gradient_lipschitz") {
                        CheckReport::inconclusive(name, why)
                    } else {
                        harness::check_armijo_lower_bound(trace, prob.gradient_lipschitz, trace.armijo_nu)
                    }
                }
                "linear_rate" => match (&prob.kl_ball, self.alpha) {
                    (None, _) => CheckReport::skipped(name, "problem declares no KL ball"),
                    (Some(_), None) => CheckReport::inconclusive(name, "no KL constant available"),
                    (Some(ball), Some(alpha)) => {
                        if let Some(why) = self.probe_blocks("kl") {
                            CheckReport::inconclusive(name, why)
                        } else if !inside(trace, ball)? {
                            CheckReport::inconclusive(name, "iterates leave the KL ball")
                        } else {
                            let r = harness::check_linear_rate(trace, alpha, slack)?;
                            rho = r.rho;
                            r.report
                        }
                    }
                },
                "quasi_fejer" => match &prob.quasi_convex_ball {
                    None => CheckReport::skipped(name, "problem declares no quasi-convex ball"),
                    Some(ball) => {
                        if let Some(why) = self.probe_blocks("quasi_convexity") {
                            CheckReport::inconclusive(name, why)
                        } else if !inside(trace, ball)? {
                            CheckReport::inconclusive(name, "iterates leave the quasi-convex ball")
                        } else {
                            harness::check_quasi_fejer(trace, &prob.objective, &self.fejer_candidates)?
                        }
                    }
                },
                other => return Err(Error::Config(format!("unknown check `{other}`"))),
            };
            out.push(rep);
        }
        Ok((out, rho))
    }
}

fn inside(trace: &Trace, ball: &crate::problems::Ball) -> Result<bool> {
    for k in 0..trace.records.len() {
        if !ball.contains(&trace.point(k)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn thin<T>(items: Vec<T>, max: usize) -> Vec<T> {
    if items.len() <= max {
        return items;
    }
    let stride = items.len().div_ceil(max);
    items.into_iter().step_by(stride).collect()
}

/// One run with its checks.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub label: String,
    pub trace: Trace,
    pub checks: Vec<CheckReport>,
    pub rho: Option<f64>,
}

/// Serializable digest of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunDigest {
    pub label: String,
    pub problem: String,
    pub rule: String,
    pub direction_mode: DirectionMode,
    pub sigma: f64,
    pub termination: Termination,
    pub error: Option<String>,
    pub iterations: usize,
    pub final_norm_v: f64,
    pub start: Vec<f64>,
    pub checks: Vec<CheckReport>,
}

impl RunOutcome {
    pub fn digest(&self) -> RunDigest {
        let tr = &self.trace;
        RunDigest {
            label: self.label.clone(),
            problem: tr.problem.clone(),
            rule: tr.rule.clone(),
            direction_mode: tr.config.direction_mode,
            sigma: tr.config.sigma,
            termination: tr.termination,
            error: tr.error.clone(),
            iterations: tr.iterations(),
            final_norm_v: tr.last().map_or(f64::NAN, |r| r.norm_v_exact),
            start: tr.records.first().map(|r| r.point.iter().copied().collect()).unwrap_or_default(),
            checks: self.checks.clone(),
        }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn errored(&self) -> bool {
        self.trace.termination == Termination::Error
    }

    /// Writes `{label}.csv`, `{label}.json`, `{label}.checks.json` and,
    /// when `plot` is set, `{label}.svg` into `dir`.
    pub fn write(&self, dir: &Path, plot: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        let file = |ext: &str| dir.join(format!("{}.{ext}", self.label));
        self.trace.write_csv(fs::File::create(file("csv"))?)?;
        fs::write(file("json"), serde_json::to_string_pretty(&self.trace.summary())? + "\n")?;
        fs::write(file("checks.json"), serde_json::to_string_pretty(&self.checks)? + "\n")?;
        if plot {
            fs::write(file("svg"), trace_svg(&self.trace, self.rho)?)?;
        }
        Ok(())
    }
}

/// Runs one start point and its checks.
pub fn run_one(
    ctx: &ProblemContext,
    label: String,
    p0: &ManifoldPoint,
    rule: &StepSizeRule,
    config: &RunConfig,
    checks: &[String],
) -> Result<RunOutcome> {
    let trace = run_with_merit(&ctx.problem.objective, p0, rule, config, Some(&ctx.oracle))?;
    let (checks, rho) = ctx.check_trace(&trace, checks)?;
    Ok(RunOutcome { label, trace, checks, rho })
}

/// Outcome of an experiment.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub problem: ProblemInfo,
    pub probes: Vec<CheckReport>,
    pub runs: Vec<RunOutcome>,
}

impl ExperimentOutcome {
    /// 3 when a run ended in an error; 1 when a requested check failed or
    /// was inconclusive; 0 otherwise. SKIPPED checks do not apply to the
    /// problem and do not count.
    pub fn exit_code(&self) -> i32 {
        let bad = |c: &CheckReport| matches!(c.status, Status::Fail | Status::Inconclusive);
        if self.runs.iter().any(RunOutcome::errored) {
            3
        } else if self.runs.iter().any(|r| r.checks.iter().any(bad)) {
            1
        } else {
            0
        }
    }
}

/// Runs a validated configuration; writes outputs when `output_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let prob = problem(&cfg.problem)?;
    let starts = initial_points(&prob, &cfg.initial_points)?;
    let info = prob.info();
    let ctx = ProblemContext::build(prob, cfg.run.phi_resolution, cfg.run.seed)?;
    let label = cfg.label();
    let runs = starts
        .iter()
        .enumerate()
        .map(|(i, p0)| run_one(&ctx, format!("{label}-{i}"), p0, &cfg.step_rule, &cfg.run, &cfg.checks))
        .collect::<Result<Vec<_>>>()?;
    let out = ExperimentOutcome { problem: info, probes: ctx.probes.clone(), runs };
    if let Some(dir) = &cfg.output_dir {
        for r in &out.runs {
            r.write(dir, cfg.plots)?;
        }
        fs::write(dir.join(format!("{label}.probes.json")), serde_json::to_string_pretty(&out.probes)? + "\n")?;
    }
    Ok(out)
}

/// Suite options.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Only problems whose id contains this string.
    pub filter: Option<String>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub plots: bool,
    pub max_iter: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { filter: None, seed: 0, output_dir: None, plots: false, max_iter: 2000 }
    }
}

/// Per-problem section of the suite report.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteProblem {
    pub problem: ProblemInfo,
    pub probes: Vec<CheckReport>,
    pub runs: Vec<RunDigest>,
}

/// The full suite report, serialized as `suite.json`.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub problems: Vec<SuiteProblem>,
    pub status_counts: BTreeMap<String, usize>,
    pub failures: Vec<String>,
    pub errors: Vec<String>,
}

impl SuiteReport {
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            3
        } else if !self.failures.is_empty() {
            1
        } else {
            0
        }
    }
}

/// (label suffix, mode, σ) of the suite's direction variants.
pub const SUITE_MODES: [(&str, DirectionMode, f64); 3] = [
    ("exact", DirectionMode::Exact, 0.0),
    ("sigma25", DirectionMode::SigmaApprox, 0.25),
    ("sigma50", DirectionMode::SigmaApprox, 0.5),
];

/// Every shipped problem × direction mode × step rule × start point, with
/// all probes and trace checks. Deterministic for a fixed seed.
pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let problems: Vec<Problem> = shipped_problems()
        .into_iter()
        .filter(|p| opts.filter.as_deref().map_or(true, |f| p.id.contains(f)))
        .collect();
    let sections = problems
        .into_par_iter()
        .map(|prob| suite_problem(prob, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut status_counts = BTreeMap::new();
    let mut failures = Vec::new();
    let mut errors = Vec::new();
    let mut problems_out = Vec::with_capacity(sections.len());
    for (section, runs) in sections {
        for p in &section.probes {
            *status_counts.entry(p.status.as_str().to_string()).or_insert(0) += 1;
            if p.status == Status::Fail {
                failures.push(format!("{} probe {}", section.problem.id, p.check));
            }
        }
        for r in &runs {
            if r.errored() {
                errors.push(format!("{}: {}", r.label, r.trace.error.clone().unwrap_or_default()));
            }
            for c in &r.checks {
                *status_counts.entry(c.status.as_str().to_string()).or_insert(0) += 1;
                if c.status == Status::Fail {
                    failures.push(format!("{} {}", r.label, c.check));
                }
            }
            if let Some(dir) = &opts.output_dir {
                r.write(&dir.join(&section.problem.id), opts.plots)?;
            }
        }
        problems_out.push(section);
    }
    let report = SuiteReport { seed: opts.seed, problems: problems_out, status_counts, failures, errors };
    if let Some(dir) = &opts.output_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("suite.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}

fn suite_problem(prob: Problem, opts: &SuiteOptions) -> Result<(SuiteProblem, Vec<RunOutcome>)> {
    let seed = opts.seed;
    let tol = prob.tol_critical;
    let mut rules = vec![("armijo", StepSizeRule::Armijo { nu: 0.5 })];
    if let Some(t) = prob.constant_step {
        rules.push(("constant", StepSizeRule::Constant { t }));
    }
    let mut starts = vec![prob.default_start.clone()];
    starts.extend(initial_points(&prob, &InitialPoints::Sampled { count: 2, seed: seed ^ 0xa11 })?);
    let info = prob.info();
    let id = prob.id;
    let ctx = ProblemContext::build(prob, 1e-3, seed)?;
    let mut jobs = Vec::new();
    for (mode_name, mode, sigma) in SUITE_MODES {
        for (rule_name, rule) in &rules {
            for (i, p0) in starts.iter().enumerate() {
                let config = RunConfig {
                    sigma,
                    direction_mode: mode,
                    tol_critical: tol,
                    max_iter: opts.max_iter,
                    seed,
                    ..RunConfig::default()
                };
                jobs.push((format!("{id}-{mode_name}-{rule_name}-{i}"), p0.clone(), rule.clone(), config));
            }
        }
    }
    let checks = default_checks();
    let runs = jobs
        .into_par_iter()
        .map(|(label, p0, rule, config)| run_one(&ctx, label, &p0, &rule, &config, &checks))
        .collect::<Result<Vec<_>>>()?;
    let digest = runs.iter().map(RunOutcome::digest).collect();
    Ok((SuiteProblem { problem: info, probes: ctx.probes.clone(), runs: digest }, runs))
}
