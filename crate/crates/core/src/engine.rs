//! The steepest descent iteration p_{k+1} = exp_{p_k}(t_k v_k) with
//! contract-checked step sizes, and trace persistence.

use std::fmt;
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::direction::{self, DirectionMode};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint, TangentVector};
use crate::merit::MeritOracle;
use crate::objective::{jacobian_action_with, VectorObjective};

/// Armijo candidates below this signal a broken gradient or direction.
pub const MIN_ARMIJO_STEP: f64 = 1e-16;

type StepFn = dyn Fn(&ManifoldPoint, &TangentVector, usize) -> f64 + Send + Sync;

/// Step-size rule. β and R come from [`RunConfig`].
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSizeRule {
    /// Largest t ∈ {1, ν, ν², …} satisfying the sufficient-decrease condition.
    Armijo { nu: f64 },
    Constant { t: f64 },
    /// Arbitrary callback (p, v, k) ↦ t; every proposal is validated.
    #[serde(skip)]
    Custom(CustomRule),
}

/// Callback wrapper for [`StepSizeRule::Custom`].
#[derive(Clone)]
pub struct CustomRule {
    pub name: String,
    pub f: Arc<StepFn>,
}

impl CustomRule {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&ManifoldPoint, &TangentVector, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for StepSizeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Armijo { nu } => write!(f, "Armijo {{ nu: {nu} }}"),
            Self::Constant { t } => write!(f, "Constant {{ t: {t} }}"),
            Self::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

impl StepSizeRule {
    pub fn validate(&self, config: &RunConfig) -> Result<()> {
        match *self {
            Self::Armijo { nu } if !(nu > 0.0 && nu < 1.0) => {
                Err(Error::Config(format!("armijo nu must lie in (0, 1), got {nu}")))
            }
            Self::Constant { t } if !(t > 0.0 && t <= config.r_max) => Err(Error::Config(format!(
                "constant step must lie in (0, {}], got {t}",
                config.r_max
            ))),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Armijo { nu } => format!("armijo(nu={nu})"),
            Self::Constant { t } => format!("constant(t={t})"),
            Self::Custom(c) => format!("custom({})", c.name),
        }
    }
}

fn default_beta() -> f64 {
    0.5
}
fn default_r_max() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    500
}
fn default_true() -> bool {
    true
}
fn default_inner() -> usize {
    200
}
fn default_solver_tol() -> f64 {
    direction::DEFAULT_TOL
}
fn default_resolution() -> f64 {
    1e-3
}

/// Algorithm parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_tol")]
    pub tol_critical: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub direction_mode: DirectionMode,
    #[serde(default = "default_true")]
    pub record_phi: bool,
    #[serde(default)]
    pub seed: u64,
    /// Frank-Wolfe budget for σ-approximate directions.
    #[serde(default = "default_inner")]
    pub max_inner_iters: usize,
    /// Duality-gap tolerance of exact direction solves.
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    /// Grid spacing of the φ̂ reference set.
    #[serde(default = "default_resolution")]
    pub phi_resolution: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            beta: default_beta(),
            r_max: default_r_max(),
            tol_critical: default_tol(),
            max_iter: default_max_iter(),
            direction_mode: DirectionMode::Exact,
            record_phi: true,
            seed: 0,
            max_inner_iters: default_inner(),
            solver_tol: default_solver_tol(),
            phi_resolution: default_resolution(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.sigma >= 0.0 && self.sigma < 1.0) {
            return bad(&format!("sigma must lie in [0, 1), got {}", self.sigma));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(&format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.r_max >= 1.0 && self.r_max.is_finite()) {
            return bad(&format!("r_max must be a finite value >= 1, got {}", self.r_max));
        }
        if !(self.tol_critical > 0.0) {
            return bad(&format!("tol_critical must be positive, got {}", self.tol_critical));
        }
        if !(self.phi_resolution > 0.0) {
            return bad(&format!("phi_resolution must be positive, got {}", self.phi_resolution));
        }
        if !(self.solver_tol > 0.0) {
            return bad(&format!("solver_tol must be positive, got {}", self.solver_tol));
        }
        Ok(())
    }
}

/// One row of a trace. Row k holds p_k and, unless it is the final row, the
/// step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub point: DVector<f64>,
    /// F(p_k).
    pub values: DVector<f64>,
    /// v_k (the exact v(p_K) on the final row).
    pub direction: DVector<f64>,
    pub norm_v: f64,
    /// ‖v(p_k)‖ of the exact direction.
    pub norm_v_exact: f64,
    pub weights: DVector<f64>,
    pub step: Option<Step>,
    pub phi: Option<f64>,
}

/// Data of the step p_k → p_{k+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub t: f64,
    /// JF(p_k)(v_k).
    pub jf: DVector<f64>,
    /// d(p_{k+1}, p_k).
    pub dist: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    CriticalReached,
    MaxIter,
    Error,
}

/// A complete run.
#[derive(Clone, Debug)]
pub struct Trace {
    pub problem: String,
    pub manifold: Manifold,
    pub config: RunConfig,
    pub rule: String,
    /// ν of an Armijo rule.
    pub armijo_nu: Option<f64>,
    pub records: Vec<IterateRecord>,
    pub termination: Termination,
    pub error: Option<String>,
}

impl Trace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.iter().filter(|r| r.step.is_some()).count()
    }

    pub fn n_objectives(&self) -> usize {
        self.records.first().map_or(0, |r| r.values.len())
    }

    pub fn last(&self) -> Option<&IterateRecord> {
        self.records.last()
    }

    pub fn point(&self, k: usize) -> Result<ManifoldPoint> {
        ManifoldPoint::new(self.manifold, self.records[k].point.clone())
    }

    /// Consecutive (record, next record, step) triples.
    pub fn steps(&self) -> impl Iterator<Item = (&IterateRecord, &IterateRecord, &Step)> {
        self.records
            .windows(2)
            .filter_map(|w| w[0].step.as_ref().map(|s| (&w[0], &w[1], s)))
    }

    pub fn has_phi(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.phi.is_some())
    }

    pub fn summary(&self) -> TraceSummary {
        let last = self.last();
        TraceSummary {
            problem: self.problem.clone(),
            manifold: self.manifold,
            termination: self.termination,
            error: self.error.clone(),
            iterations: self.iterations(),
            final_point: last.map(|r| r.point.iter().copied().collect()).unwrap_or_default(),
            final_values: last.map(|r| r.values.iter().copied().collect()).unwrap_or_default(),
            final_norm_v: last.map_or(f64::NAN, |r| r.norm_v_exact),
            final_phi: last.and_then(|r| r.phi),
            rule: self.rule.clone(),
            armijo_nu: self.armijo_nu,
            config: self.config.clone(),
        }
    }
}

/// JSON summary written next to each trace CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceSummary {
    pub problem: String,
    pub manifold: Manifold,
    pub termination: Termination,
    pub error: Option<String>,
    pub iterations: usize,
    pub final_point: Vec<f64>,
    pub final_values: Vec<f64>,
    pub final_norm_v: f64,
    pub final_phi: Option<f64>,
    pub rule: String,
    pub armijo_nu: Option<f64>,
    pub config: RunConfig,
}

/// F(p⁺) ⪯ F(p) + βt·JF(p)(v), compared exactly in floating point.
pub fn decrease_holds(fp: &DVector<f64>, jf: &DVector<f64>, f_next: &DVector<f64>, beta: f64, t: f64) -> bool {
    f_next
        .iter()
        .zip(fp.iter().zip(jf.iter()))
        .all(|(&n, (&a, &j))| n <= a + beta * t * j)
}

/// Sufficient-decrease test for the step t along v from p.
pub fn sufficient_decrease(
    f: &VectorObjective,
    p: &ManifoldPoint,
    v: &TangentVector,
    t: f64,
    beta: f64,
) -> Result<bool> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {t}")));
    }
    let fp = f.evaluate(p)?;
    let jf = f.jacobian_action(p, v)?;
    let next = f.evaluate(&p.exp(v, t)?)?;
    Ok(decrease_holds(&fp, &jf, &next, beta, t))
}

/// Backtracking over {ν^i : i ≥ 0} ∩ (0, R].
pub fn armijo_step(
    f: &VectorObjective,
    p: &ManifoldPoint,
    v: &TangentVector,
    nu: f64,
    beta: f64,
    r_max: f64,
) -> Result<f64> {
    let fp = f.evaluate(p)?;
    let jf = f.jacobian_action(p, v)?;
    armijo_with(f, p, v, &fp, &jf, nu, beta, r_max)
}

#[allow(clippy::too_many_arguments)]
fn armijo_with(
    f: &VectorObjective,
    p: &ManifoldPoint,
    v: &TangentVector,
    fp: &DVector<f64>,
    jf: &DVector<f64>,
    nu: f64,
    beta: f64,
    r_max: f64,
) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidArgument(format!("nu must lie in (0, 1), got {nu}")));
    }
    let mut i = 0;
    loop {
        let t = nu.powi(i);
        if t < MIN_ARMIJO_STEP {
            return Err(Error::LineSearchFailure(MIN_ARMIJO_STEP));
        }
        i += 1;
        if t > r_max {
            continue;
        }
        // A candidate whose objective cannot be evaluated is rejected.
        match p.exp(v, t).and_then(|q| f.evaluate(&q)) {
            Ok(next) if decrease_holds(fp, jf, &next, beta, t) => return Ok(t),
            Ok(_) | Err(Error::Evaluation { .. }) => {}
            Err(e) => return Err(e),
        }
    }
}

/// Runs the method without merit recording.
pub fn run(f: &VectorObjective, p0: &ManifoldPoint, rule: &StepSizeRule, config: &RunConfig) -> Result<Trace> {
    run_with_merit(f, p0, rule, config, None)
}

/// Runs the method, recording φ̂(p_k) when an oracle is given and
/// `config.record_phi` is set.
///
/// Returns `Err` only for invalid input. Failures during the iteration
/// (evaluation errors, step-rule contract violations) yield a trace with
/// [`Termination::Error`].
pub fn run_with_merit(
    f: &VectorObjective,
    p0: &ManifoldPoint,
    rule: &StepSizeRule,
    config: &RunConfig,
    oracle: Option<&MeritOracle>,
) -> Result<Trace> {
    config.validate()?;
    rule.validate(config)?;
    if p0.manifold() != f.manifold() {
        return Err(Error::ManifoldMismatch(format!(
            "start point on {:?}, objective on {:?}",
            p0.manifold(),
            f.manifold()
        )));
    }
    let oracle = oracle.filter(|_| config.record_phi);
    let mut trace = Trace {
        problem: f.name().to_string(),
        manifold: f.manifold(),
        config: config.clone(),
        rule: rule.label(),
        armijo_nu: match rule {
            StepSizeRule::Armijo { nu } => Some(*nu),
            _ => None,
        },
        records: Vec::new(),
        termination: Termination::MaxIter,
        error: None,
    };
    if let Err(e) = iterate(f, p0.clone(), rule, config, oracle, &mut trace) {
        trace.termination = Termination::Error;
        trace.error = Some(e.to_string());
    }
    Ok(trace)
}

fn iterate(
    f: &VectorObjective,
    mut p: ManifoldPoint,
    rule: &StepSizeRule,
    config: &RunConfig,
    oracle: Option<&MeritOracle>,
    trace: &mut Trace,
) -> Result<()> {
    let mut fp = f.evaluate(&p)?;
    for k in 0.. {
        let grads = f.gradients(&p)?;
        let exact = direction::solve_exact(&p, &grads, config.solver_tol)?;
        let phi = oracle.map(|o| o.phi_from_values(&fp));
        let norm_exact = exact.norm();

        let stop = if norm_exact <= config.tol_critical {
            Some(Termination::CriticalReached)
        } else if k >= config.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        if let Some(term) = stop {
            trace.records.push(IterateRecord {
                k,
                point: p.coords().clone(),
                values: fp,
                direction: exact.v.coords().clone(),
                norm_v: norm_exact,
                norm_v_exact: norm_exact,
                weights: exact.weights,
                step: None,
                phi,
            });
            trace.termination = term;
            return Ok(());
        }

        let dir = match config.direction_mode {
            DirectionMode::Exact => exact,
            DirectionMode::SigmaApprox => {
                direction::solve_sigma_approx(&p, &grads, config.sigma, config.max_inner_iters)?
            }
        };
        let v = &dir.v;
        let jf = jacobian_action_with(&grads, v);
        let t = match rule {
            StepSizeRule::Armijo { nu } => armijo_with(f, &p, v, &fp, &jf, *nu, config.beta, config.r_max)?,
            StepSizeRule::Constant { t } => *t,
            StepSizeRule::Custom(c) => (c.f)(&p, v, k),
        };
        if !(t > 0.0 && t <= config.r_max) {
            return Err(Error::StepRule(format!(
                "step {t} at iteration {k} outside (0, {}]",
                config.r_max
            )));
        }
        let next = p.exp(v, t)?;
        let f_next = f.evaluate(&next)?;
        if !decrease_holds(&fp, &jf, &f_next, config.beta, t) {
            return Err(Error::StepRule(format!(
                "step {t} at iteration {k} violates sufficient decrease"
            )));
        }
        let dist = next.dist(&p)?;
        trace.records.push(IterateRecord {
            k,
            point: p.coords().clone(),
            values: fp,
            direction: v.coords().clone(),
            norm_v: v.norm(),
            norm_v_exact: norm_exact,
            weights: dir.weights.clone(),
            step: Some(Step { t, jf, dist }),
            phi,
        });
        p = next;
        fp = f_next;
    }
    unreachable!()
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

fn header(n: usize, dim: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["k".into(), "t".into(), "norm_v".into()];
    h.extend((0..n).map(|i| format!("f{i}")));
    h.extend(["dist_step".into(), "phi".into(), "norm_v_exact".into()]);
    h.extend((0..n).map(|i| format!("jf{i}")));
    h.extend((0..n).map(|i| format!("w{i}")));
    h.extend((0..dim).map(|i| format!("x{i}")));
    h.extend((0..dim).map(|i| format!("v{i}")));
    h
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Trace {
    /// Columns: k, t, norm_v, f0.., dist_step, phi, then norm_v_exact, jf0..,
    /// w0.., x0.., v0... Step fields are empty on the final row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let n = self.n_objectives();
        let dim = self.manifold.ambient_dim();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header(n, dim))?;
        for r in &self.records {
            let mut row = vec![r.k.to_string(), opt(r.step.as_ref().map(|s| s.t)), num(r.norm_v)];
            row.extend(r.values.iter().map(|&x| num(x)));
            row.push(opt(r.step.as_ref().map(|s| s.dist)));
            row.push(opt(r.phi));
            row.push(num(r.norm_v_exact));
            match &r.step {
                Some(s) => row.extend(s.jf.iter().map(|&x| num(x))),
                None => row.extend(std::iter::repeat(String::new()).take(n)),
            }
            row.extend(r.weights.iter().map(|&x| num(x)));
            row.extend(r.point.iter().map(|&x| num(x)));
            row.extend(r.direction.iter().map(|&x| num(x)));
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a trace written by [`Trace::write_csv`]; metadata comes from the summary.
    pub fn read_csv<R: Read>(r: R, summary: &TraceSummary) -> Result<Trace> {
        let dim = summary.manifold.ambient_dim();
        let mut rdr = csv::Reader::from_reader(r);
        let hdr = rdr.headers()?.clone();
        let n = hdr.iter().filter(|h| h.starts_with('f')).count();
        if hdr.iter().collect::<Vec<_>>() != header(n, dim) {
            return Err(Error::Config("trace CSV header does not match its summary".into()));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{s}` in trace CSV")))
        };
        let parse_opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse(s).map(Some)
            }
        };
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let col = |i: usize| row.get(i).unwrap_or("");
            let vecn = |start: usize, len: usize| -> Result<DVector<f64>> {
                (start..start + len).map(|i| parse(col(i))).collect::<Result<Vec<_>>>().map(DVector::from_vec)
            };
            let k = col(0)
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad iteration index `{}`", col(0))))?;
            let t = parse_opt(col(1))?;
            let norm_v = parse(col(2))?;
            let values = vecn(3, n)?;
            let dist = parse_opt(col(3 + n))?;
            let phi = parse_opt(col(4 + n))?;
            let norm_v_exact = parse(col(5 + n))?;
            let jf_start = 6 + n;
            let step = match (t, dist) {
                (Some(t), Some(dist)) => Some(Step { t, jf: vecn(jf_start, n)?, dist }),
                _ => None,
            };
            let weights = vecn(jf_start + n, n)?;
            let point = vecn(jf_start + 2 * n, dim)?;
            let direction = vecn(jf_start + 2 * n + dim, dim)?;
            records.push(IterateRecord {
                k,
                point,
                values,
                direction,
                norm_v,
                norm_v_exact,
                weights,
                step,
                phi,
            });
        }
        Ok(Trace {
            problem: summary.problem.clone(),
            manifold: summary.manifold,
            config: summary.config.clone(),
            rule: summary.rule.clone(),
            armijo_nu: summary.armijo_nu,
            records,
            termination: summary.termination,
            error: summary.error.clone(),
        })
    }
}
