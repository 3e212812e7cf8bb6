//! Executable versions of the inequalities behind the method: trace
//! invariants, merit-function estimates, rate bounds, quasi-Fejér behavior,
//! the curvature distance inequality, and probes of declared problem flags.
//!
//! Every check returns a [`CheckReport`]. Margins are signed so that a
//! non-negative margin means the inequality holds; slack terms are already
//! included in the margin.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::direction::{self, DirectionMode};
use crate::engine::{decrease_holds, Termination, Trace};
use crate::error::Result;
use crate::geometry::{random_unit_tangent, sample_in_annulus, sample_in_ball, Manifold, ManifoldPoint, TangentVector};
use crate::merit::MeritOracle;
use crate::objective::{leq, lt, VectorObjective};
use crate::problems::Ball;

/// Slack used by probes that compare objective values.
pub const PROBE_SLACK: f64 = 1e-8;
/// Absolute slack of the movement and quasi-Fejér bounds.
pub const DIST_SLACK: f64 = 1e-8;
/// Tolerance of the strict curvature distance inequality.
pub const QC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub worst_margin: Option<f64>,
    pub k_at_worst: Option<usize>,
    pub constants: BTreeMap<String, f64>,
    pub detail: String,
}

impl CheckReport {
    pub fn new(check: &str, status: Status, detail: impl Into<String>) -> Self {
        Self {
            check: check.to_string(),
            status,
            worst_margin: None,
            k_at_worst: None,
            constants: BTreeMap::new(),
            detail: detail.into(),
        }
    }

    pub fn skipped(check: &str, detail: impl Into<String>) -> Self {
        Self::new(check, Status::Skipped, detail)
    }

    pub fn inconclusive(check: &str, detail: impl Into<String>) -> Self {
        Self::new(check, Status::Inconclusive, detail)
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Running minimum of margins.
#[derive(Default)]
struct Worst {
    margin: Option<f64>,
    k: Option<usize>,
    count: usize,
}

impl Worst {
    fn observe(&mut self, margin: f64, k: Option<usize>) {
        self.count += 1;
        // NaN margins count as the worst possible outcome
        let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        if self.margin.map_or(true, |w| m < w) {
            self.margin = Some(m);
            self.k = k;
        }
    }

    /// PASS iff every margin exceeds `threshold` (≥ when `strict` is false).
    fn report(self, check: &str, threshold: f64, strict: bool, detail: impl Into<String>) -> CheckReport {
        let ok = match self.margin {
            None => true,
            Some(m) if strict => m > threshold,
            Some(m) => m >= threshold,
        };
        let mut r = CheckReport::new(check, if ok { Status::Pass } else { Status::Fail }, detail);
        r.worst_margin = self.margin;
        r.k_at_worst = self.k;
        r.constants.insert("samples".into(), self.count as f64);
        r
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Trace invariants
// ---------------------------------------------------------------------------

/// F(p_{k+1}) ⪯ F(p_k), compared exactly.
pub fn check_monotone(trace: &Trace) -> CheckReport {
    let mut w = Worst::default();
    for (r, next, _) in trace.steps() {
        let m = r.values.iter().zip(next.values.iter()).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
        w.observe(m, Some(r.k));
    }
    w.report("monotone", 0.0, false, "min_i f_i(p_k) - f_i(p_{k+1})")
}

/// t_k ∈ (0, R].
pub fn check_step_bound(trace: &Trace) -> CheckReport {
    let r_max = trace.config.r_max;
    let mut w = Worst::default();
    let mut positive = true;
    for (r, _, s) in trace.steps() {
        positive &= s.t > 0.0;
        w.observe(r_max - s.t, Some(r.k));
    }
    let mut rep = w.report("step_bound", 0.0, false, "R - t_k; every t_k > 0").with("r_max", r_max);
    if !positive {
        rep.status = Status::Fail;
    }
    rep
}

/// d(p_{k+1}, p_k) ≤ t_k‖v_k‖ + 1e-8, with distances recomputed from the
/// stored points.
pub fn check_movement(trace: &Trace) -> Result<CheckReport> {
    let mut w = Worst::default();
    for k in 0..trace.records.len().saturating_sub(1) {
        let r = &trace.records[k];
        let Some(s) = &r.step else { continue };
        let d = trace.point(k + 1)?.dist(&trace.point(k)?)?;
        w.observe(s.t * r.norm_v + DIST_SLACK - d, Some(r.k));
    }
    Ok(w.report("movement", 0.0, false, "t_k |v_k| + 1e-8 - d(p_{k+1}, p_k)"))
}

/// F(p_{k+1}) ⪯ F(p_k) + βt_k JF(p_k)(v_k), recomputed from stored values
/// with the engine's exact comparison.
pub fn check_sufficient_decrease(trace: &Trace) -> CheckReport {
    let beta = trace.config.beta;
    let mut w = Worst::default();
    let mut all = true;
    for (r, next, s) in trace.steps() {
        all &= decrease_holds(&r.values, &s.jf, &next.values, beta, s.t);
        let m = (0..r.values.len())
            .map(|i| r.values[i] + beta * s.t * s.jf[i] - next.values[i])
            .fold(f64::INFINITY, f64::min);
        w.observe(m, Some(r.k));
    }
    let mut rep = w.report("sufficient_decrease", 0.0, false, "min_i f_i(p_k) + beta t_k JF_i - f_i(p_{k+1})");
    rep.status = if all { Status::Pass } else { Status::Fail };
    rep.with("beta", beta)
}

/// A run that stopped as critical must have ‖v(p_K)‖ ≤ tol_critical.
pub fn check_cluster_criticality(trace: &Trace) -> CheckReport {
    let Some(last) = trace.last() else {
        return CheckReport::inconclusive("cluster_criticality", "empty trace");
    };
    match trace.termination {
        Termination::CriticalReached => {
            let mut w = Worst::default();
            w.observe(trace.config.tol_critical - last.norm_v_exact, Some(last.k));
            w.report("cluster_criticality", 0.0, false, "tol - |v(p_K)|")
                .with("tol_critical", trace.config.tol_critical)
        }
        Termination::MaxIter => CheckReport::inconclusive(
            "cluster_criticality",
            format!("iteration budget exhausted with |v(p_K)| = {}", last.norm_v_exact),
        ),
        Termination::Error => CheckReport::inconclusive("cluster_criticality", "run aborted"),
    }
}

// ---------------------------------------------------------------------------
// Merit-function checks
// ---------------------------------------------------------------------------

fn phis(trace: &Trace) -> Option<Vec<f64>> {
    if trace.records.is_empty() {
        return None;
    }
    trace.records.iter().map(|r| r.phi).collect()
}

/// (βt_k/2)‖v_k‖² ≤ φ̂(p_k) − φ̂(p_{k+1}) + slack, and the order-monotone
/// consequence φ̂(p_{k+1}) ≤ φ̂(p_k) + slack.
pub fn check_phi_descent(trace: &Trace, slack: f64) -> CheckReport {
    let Some(phi) = phis(trace) else {
        return CheckReport::inconclusive("phi_descent", "trace has no recorded merit values");
    };
    let beta = trace.config.beta;
    let mut w = Worst::default();
    for (r, _, s) in trace.steps() {
        let k = r.k;
        let drop = phi[k] - phi[k + 1];
        w.observe(drop + slack - 0.5 * beta * s.t * r.norm_v * r.norm_v, Some(k));
        w.observe(drop + slack, Some(k));
    }
    w.report("phi_descent", 0.0, false, "phi_k - phi_{k+1} + slack - (beta t_k / 2)|v_k|^2")
        .with("slack", slack)
        .with("beta", beta)
}

/// Σ t_k²‖v_k‖² ≤ (2R/β)(φ̂(p₀) + slack).
pub fn check_summability(trace: &Trace, slack: f64) -> CheckReport {
    let Some(phi) = phis(trace) else {
        return CheckReport::inconclusive("summability", "trace has no recorded merit values");
    };
    let (beta, r_max) = (trace.config.beta, trace.config.r_max);
    let bound = 2.0 * r_max / beta * (phi[0] + slack);
    let mut sum = 0.0;
    let mut w = Worst::default();
    for (r, _, s) in trace.steps() {
        sum += (s.t * r.norm_v).powi(2);
        w.observe(bound - sum, Some(r.k));
    }
    w.report("summability", 0.0, false, "(2R/beta)(phi_0 + slack) - partial sum of t_k^2 |v_k|^2")
        .with("bound", bound)
        .with("sum", sum)
        .with("slack", slack)
}

/// Every Armijo step satisfies t_k ≥ min{ν, ν(1−β)/(2L)}.
pub fn check_armijo_lower_bound(trace: &Trace, lipschitz: Option<f64>, nu: Option<f64>) -> CheckReport {
    let Some(nu) = nu else {
        return CheckReport::skipped("armijo_lower_bound", "not an Armijo run");
    };
    let Some(l) = lipschitz else {
        return CheckReport::inconclusive("armijo_lower_bound", "no gradient-Lipschitz constant declared");
    };
    let beta = trace.config.beta;
    let bound = nu.min(nu * (1.0 - beta) / (2.0 * l));
    let mut w = Worst::default();
    for (r, _, s) in trace.steps() {
        w.observe(s.t - bound + 1e-12, Some(r.k));
    }
    w.report("armijo_lower_bound", 0.0, false, "t_k - min{nu, nu(1-beta)/(2L)} + 1e-12")
        .with("bound", bound)
        .with("lipschitz", l)
        .with("nu", nu)
}

/// Sampled estimate of the KL constant on a ball.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KlEstimate {
    pub alpha_hat: Option<f64>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub samples: usize,
    pub used: usize,
}

/// α̂ = min over sampled p ∈ B(p̄, r) with φ̂(p) > 10·slack of ‖v(p)‖²/φ̂(p).
pub fn estimate_kl(
    objective: &VectorObjective,
    oracle: &MeritOracle,
    ball: &Ball,
    samples: usize,
    seed: u64,
) -> Result<KlEstimate> {
    let mut r = rng(seed);
    let cutoff = 10.0 * oracle.slack();
    let mut best: Option<f64> = None;
    let mut used = 0;
    for _ in 0..samples {
        let p = sample_in_ball(&ball.center, ball.radius, &mut r)?;
        let phi = oracle.phi(objective, &p)?;
        if phi <= cutoff {
            continue;
        }
        let v = direction::solve_exact(&p, &objective.gradients(&p)?, direction::DEFAULT_TOL)?;
        let ratio = v.v.norm_squared() / phi;
        used += 1;
        best = Some(best.map_or(ratio, |b: f64| b.min(ratio)));
    }
    Ok(KlEstimate {
        alpha_hat: best,
        center: ball.center.coords().iter().copied().collect(),
        radius: ball.radius,
        samples,
        used,
    })
}

/// Probe of the KL flag: α̂ > 0.
pub fn kl_report(est: &KlEstimate) -> CheckReport {
    match est.alpha_hat {
        None => CheckReport::inconclusive("kl", "every sample was within the exclusion band"),
        Some(a) => {
            let mut w = Worst::default();
            w.observe(a, None);
            w.report("kl", 0.0, true, "alpha_hat = min |v(p)|^2 / phi(p)")
                .with("alpha_hat", a)
                .with("used", est.used as f64)
                .with("radius", est.radius)
        }
    }
}

/// Constants of the linear-rate bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub rho: Option<f64>,
    pub mu: Option<f64>,
    pub t_low: Option<f64>,
    pub alpha: f64,
    pub report: CheckReport,
}

/// Verifies, with ρ = √(1 − αβt̲(1−√σ)²/2), μ = 2R/((1−ρ)²β) and p* the
/// final iterate:
///
/// * φ̂(p_{k+1}) ≤ ρ²φ̂(p_k) + slack
/// * φ̂(p_k) ≤ ρ^{2k}φ̂(p₀) + slack
/// * d²(p_k, p*) ≤ μ·max(φ̂(p_k), 0) + slack and d²(p_k, p*) ≤ μρ^{2k}φ̂(p₀) + slack
pub fn check_linear_rate(trace: &Trace, alpha: f64, slack: f64) -> Result<RateReport> {
    let name = "linear_rate";
    let sigma = match trace.config.direction_mode {
        DirectionMode::Exact => 0.0,
        DirectionMode::SigmaApprox => trace.config.sigma,
    };
    let (beta, r_max) = (trace.config.beta, trace.config.r_max);
    let t_low = trace.steps().map(|(_, _, s)| s.t).fold(f64::INFINITY, f64::min);
    let done = |report: CheckReport, rho, mu, t_low| RateReport { rho, mu, t_low, alpha, report };
    let Some(phi) = phis(trace) else {
        return Ok(done(CheckReport::inconclusive(name, "trace has no recorded merit values"), None, None, None));
    };
    if !t_low.is_finite() {
        let mut rep = CheckReport::new(name, Status::Pass, "no steps taken");
        rep.constants.insert("alpha".into(), alpha);
        return Ok(done(rep, None, None, None));
    }
    let c = alpha * beta * t_low * (1.0 - sigma.sqrt()).powi(2) / 2.0;
    if !(c > 0.0 && c < 1.0) {
        let rep = CheckReport::inconclusive(name, format!("rho^2 = 1 - {c} is not in (0, 1)"))
            .with("alpha", alpha)
            .with("t_low", t_low);
        return Ok(done(rep, None, None, Some(t_low)));
    }
    let rho2 = 1.0 - c;
    let rho = rho2.sqrt();
    let mu = 2.0 * r_max / ((1.0 - rho).powi(2) * beta);
    let last = trace.records.len() - 1;
    let p_star = trace.point(last)?;
    let mut w = Worst::default();
    for k in 0..=last {
        let decay = rho2.powi(k as i32) * phi[0];
        if k < last {
            w.observe(rho2 * phi[k] + slack - phi[k + 1], Some(k));
        }
        w.observe(decay + slack - phi[k], Some(k));
        // φ ≥ 0, so max(φ̂, 0) still under-approximates φ
        let d2 = trace.point(k)?.dist(&p_star)?.powi(2);
        w.observe(mu * phi[k].max(0.0) + slack - d2, Some(k));
        w.observe(mu * decay + slack - d2, Some(k));
    }
    let rep = w
        .report(name, 0.0, false, "worst of the contraction, decay and distance chains")
        .with("alpha", alpha)
        .with("rho", rho)
        .with("mu", mu)
        .with("t_low", t_low)
        .with("sigma", sigma)
        .with("slack", slack);
    Ok(done(rep, Some(rho), Some(mu), Some(t_low)))
}

// ---------------------------------------------------------------------------
// Quasi-Fejér and curvature inequality
// ---------------------------------------------------------------------------

/// d²(p_{k+1}, q) ≤ d²(p_k, q) + 2Rt_k‖v_k‖² + 1e-8 for every step k and
/// every q with F(q) ⪯ F(p_{k+1}), drawn from `candidates` and the iterates.
pub fn check_quasi_fejer(trace: &Trace, objective: &VectorObjective, candidates: &[ManifoldPoint]) -> Result<CheckReport> {
    let r_max = trace.config.r_max;
    let points = (0..trace.records.len()).map(|k| trace.point(k)).collect::<Result<Vec<_>>>()?;
    let candidates: Vec<ManifoldPoint> = candidates.iter().chain(&points).cloned().collect();
    let values = candidates.iter().map(|q| objective.evaluate(q)).collect::<Result<Vec<_>>>()?;
    let mut w = Worst::default();
    let mut pairs = 0usize;
    for (r, next, s) in trace.steps() {
        let k = r.k;
        for (q, fq) in candidates.iter().zip(&values) {
            if !leq(fq, &next.values)? {
                continue;
            }
            pairs += 1;
            let before = points[k].dist(q)?.powi(2);
            let after = points[k + 1].dist(q)?.powi(2);
            w.observe(before + 2.0 * r_max * s.t * r.norm_v * r.norm_v + DIST_SLACK - after, Some(k));
        }
    }
    if pairs == 0 && trace.iterations() > 0 {
        return Ok(CheckReport::inconclusive("quasi_fejer", "no admissible dominating q"));
    }
    Ok(w.report("quasi_fejer", 0.0, false, "d^2(p_k,q) + 2R t_k |v_k|^2 + 1e-8 - d^2(p_{k+1},q)")
        .with("pairs", pairs as f64)
        .with("candidates", candidates.len() as f64))
}

/// ħ(s) = tanh(s)/s with ħ(0) = 1.
pub fn hbar(s: f64) -> f64 {
    if s.abs() < 1e-8 {
        1.0 - s * s / 3.0
    } else {
        s.tanh() / s
    }
}

/// Outcome of one evaluation of the curvature distance inequality.
#[derive(Clone, Copy, Debug)]
pub struct QcOutcome {
    pub status: Status,
    /// RHS − LHS of d²(γ(t),q) < d²(p,q) + 3t²‖v‖²/(2ħ(√|κ| d(p,q))).
    pub margin: f64,
}

/// Evaluates the curvature distance inequality at (p, q, v, t) for a
/// curvature lower bound κ. Returns SKIPPED when F(q) ⪯ F(p) or
/// √|κ|·t‖v‖ ≤ 1 fails. At t = 0 both sides agree and the result is PASS.
pub fn check_qc_distance_inequality(
    objective: &VectorObjective,
    kappa: f64,
    p: &ManifoldPoint,
    v: &TangentVector,
    t: f64,
    q: &ManifoldPoint,
) -> Result<QcOutcome> {
    let c = kappa.abs().sqrt();
    if !(t >= 0.0) || c * t * v.norm() > 1.0 || !leq(&objective.evaluate(q)?, &objective.evaluate(p)?)? {
        return Ok(QcOutcome { status: Status::Skipped, margin: f64::NAN });
    }
    if t == 0.0 {
        return Ok(QcOutcome { status: Status::Pass, margin: 0.0 });
    }
    let d = p.dist(q)?;
    let lhs = p.exp(v, t)?.dist(q)?.powi(2);
    let rhs = d * d + 3.0 * t * t * v.norm_squared() / (2.0 * hbar(c * d));
    let margin = rhs - lhs;
    let status = if margin > -QC_TOL { Status::Pass } else { Status::Fail };
    Ok(QcOutcome { status, margin })
}

/// Monte-Carlo batch of admissible tuples: p, q in the ball with
/// F(q) ⪯ F(p), v = −Σλᵢ∇fᵢ(p) for random simplex λ, and t with
/// √|κ|·t‖v‖ ≤ 1 and t ≤ R.
pub fn qc_distance_monte_carlo(
    objective: &VectorObjective,
    ball: &Ball,
    r_max: f64,
    count: usize,
    seed: u64,
) -> Result<CheckReport> {
    let kappa = objective.manifold().curvature_lower_bound();
    let c = kappa.abs().sqrt();
    let mut r = rng(seed);
    let mut w = Worst::default();
    let mut tried = 0;
    let mut accepted = 0;
    while accepted < count && tried < 200 * count {
        tried += 1;
        let p = sample_in_ball(&ball.center, ball.radius, &mut r)?;
        let q = sample_in_ball(&ball.center, ball.radius, &mut r)?;
        if !leq(&objective.evaluate(&q)?, &objective.evaluate(&p)?)? {
            continue;
        }
        let grads = objective.gradients(&p)?;
        let raw: Vec<f64> = (0..grads.len()).map(|_| -r.gen::<f64>().max(1e-12).ln()).collect();
        let total: f64 = raw.iter().sum();
        let neg_lambda: Vec<f64> = raw.iter().map(|x| -x / total).collect();
        let v = TangentVector::combination(&grads, &neg_lambda)?;
        let nv = v.norm();
        let t_max = if nv > 0.0 { r_max.min(1.0 / (c * nv).max(1e-300)) } else { r_max };
        let t = r.gen::<f64>() * t_max;
        let out = check_qc_distance_inequality(objective, kappa, &p, &v, t, &q)?;
        if out.status == Status::Skipped {
            continue;
        }
        accepted += 1;
        w.observe(out.margin, None);
    }
    if accepted < count {
        return Ok(CheckReport::inconclusive(
            "qc_distance",
            format!("only {accepted} admissible tuples in {tried} draws"),
        ));
    }
    Ok(w.report("qc_distance", -QC_TOL, true, "rhs - lhs of the curvature distance inequality")
        .with("kappa", kappa)
        .with("denominator_at_1", 2.0 * hbar(c)))
}

/// Samples annuli around p₀ along the radius ladder and reports the largest
/// radius holding members of {p : F(p) ⪯ F(p₀)}. PASS when the two outermost
/// rungs hold none.
pub fn check_sublevel_bounded(
    objective: &VectorObjective,
    p0: &ManifoldPoint,
    ladder: &[f64],
    samples_per_rung: usize,
    seed: u64,
) -> Result<CheckReport> {
    let name = "sublevel_bounded";
    if let Manifold::Sphere { .. } = p0.manifold() {
        return Ok(CheckReport::new(name, Status::Pass, "compact manifold"));
    }
    if ladder.len() < 2 {
        return Ok(CheckReport::inconclusive(name, "ladder needs at least two rungs"));
    }
    let f0 = objective.evaluate(p0)?;
    let mut r = rng(seed);
    let mut counts = Vec::with_capacity(ladder.len());
    let mut inner = 0.0;
    for &outer in ladder {
        let mut members = 0usize;
        for _ in 0..samples_per_rung {
            let q = sample_in_annulus(p0, inner, outer, &mut r)?;
            if let Ok(fq) = objective.evaluate(&q) {
                if leq(&fq, &f0)? {
                    members += 1;
                }
            }
        }
        counts.push(members);
        inner = outer;
    }
    let reach = ladder.iter().zip(&counts).filter(|(_, &c)| c > 0).map(|(&r, _)| r).fold(0.0, f64::max);
    let n = counts.len();
    let bounded = counts[n - 1] == 0 && counts[n - 2] == 0;
    let detail = if bounded {
        format!("members up to radius {reach}; counts per rung {counts:?}")
    } else {
        format!("unbounded: members persist at radius {reach}; counts per rung {counts:?}")
    };
    let mut rep = CheckReport::new(name, if bounded { Status::Pass } else { Status::Fail }, detail);
    rep.constants.insert("largest_member_radius".into(), reach);
    rep.constants.insert("outer_radius".into(), ladder[n - 1]);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Probes of declared problem properties
// ---------------------------------------------------------------------------

/// Richardson-extrapolated one-sided difference quotient of f along exp.
fn directional_fd(objective: &VectorObjective, i: usize, p: &ManifoldPoint, v: &TangentVector) -> Result<f64> {
    let f0 = objective.evaluate(p)?[i];
    let q = |h: f64| -> Result<f64> { Ok((objective.evaluate(&p.exp(v, h)?)?[i] - f0) / h) };
    let (d1, d2) = (q(1e-4)?, q(1e-5)?);
    Ok((10.0 * d2 - d1) / 9.0)
}

/// Analytic gradients against difference quotients on random (p, v, i).
pub fn probe_fd_gradient(objective: &VectorObjective, ball: &Ball, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut r = rng(seed);
    let mut w = Worst::default();
    for _ in 0..samples {
        let p = sample_in_ball(&ball.center, ball.radius, &mut r)?;
        let v = random_unit_tangent(&p, &mut r)?;
        let i = r.gen_range(0..objective.len());
        let exact = objective.gradients(&p)?[i].inner(&v)?;
        let fd = directional_fd(objective, i, &p, &v)?;
        w.observe(1e-5 * exact.abs().max(1.0) - (fd - exact).abs(), None);
    }
    Ok(w.report("fd_gradient", 0.0, false, "1e-5 max(1,|<grad f_i, v>|) - |fd - <grad f_i, v>|"))
}

/// Reflexivity, antisymmetry and transitivity of ⪯ and ≺ ⟹ ⪯ on random
/// integer-valued triples (so ties occur).
pub fn probe_order(n: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut r = rng(seed);
    let mut w = Worst::default();
    let draw = |r: &mut ChaCha8Rng| DVector::from_fn(n, |_, _| r.gen_range(-2i32..=2) as f64);
    for _ in 0..samples {
        let (x, y, z) = (draw(&mut r), draw(&mut r), draw(&mut r));
        let mut ok = leq(&x, &x)?;
        if leq(&x, &y)? && leq(&y, &x)? {
            ok &= x == y;
        }
        if leq(&x, &y)? && leq(&y, &z)? {
            ok &= leq(&x, &z)?;
        }
        if lt(&x, &y)? {
            ok &= leq(&x, &y)? && x != y;
        }
        w.observe(if ok { 0.0 } else { -1.0 }, None);
    }
    Ok(w.report("order", 0.0, false, "order axioms on sampled triples"))
}

fn geodesic_samples(ball: &Ball, samples: usize, seed: u64) -> Result<Vec<(ManifoldPoint, ManifoldPoint)>> {
    let mut r = rng(seed);
    (0..samples)
        .map(|_| Ok((sample_in_ball(&ball.center, ball.radius, &mut r)?, sample_in_ball(&ball.center, ball.radius, &mut r)?)))
        .collect()
}

const TS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Worst margin of max{h(p), h(q)} − h(γ(t)) along sampled geodesics.
fn quasi_convex_margin(h: impl Fn(&ManifoldPoint) -> Result<DVector<f64>>, pairs: &[(ManifoldPoint, ManifoldPoint)]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for (p, q) in pairs {
        let (hp, hq) = (h(p)?, h(q)?);
        let top = hp.zip_map(&hq, f64::max);
        let v = p.log(q)?;
        for &t in &TS {
            let hg = h(&p.exp(&v, t)?)?;
            worst = worst.min((&top - hg).min());
        }
    }
    Ok(worst)
}

/// F(γ(t)) ⪯ max{F(p), F(q)} along sampled geodesics in the ball.
pub fn probe_quasi_convexity(objective: &VectorObjective, ball: &Ball, samples: usize, seed: u64) -> Result<CheckReport> {
    let pairs = geodesic_samples(ball, samples, seed)?;
    let m = quasi_convex_margin(|x| objective.evaluate(x), &pairs)?;
    let mut w = Worst::default();
    w.observe(m + PROBE_SLACK, None);
    Ok(w.report("quasi_convexity", 0.0, false, "max{F(p),F(q)} - F(gamma(t)) + 1e-8").with("radius", ball.radius))
}

/// fᵢ(γ(t)) ≤ (1−t)fᵢ(p) + t fᵢ(q) along sampled geodesics in the ball.
pub fn probe_convexity(objective: &VectorObjective, ball: &Ball, samples: usize, seed: u64) -> Result<CheckReport> {
    let pairs = geodesic_samples(ball, samples, seed)?;
    let mut w = Worst::default();
    for (p, q) in &pairs {
        let (fp, fq) = (objective.evaluate(p)?, objective.evaluate(q)?);
        let v = p.log(q)?;
        for &t in &TS {
            let fg = objective.evaluate(&p.exp(&v, t)?)?;
            w.observe((fp.clone() * (1.0 - t) + &fq * t - fg).min() + PROBE_SLACK, None);
        }
    }
    Ok(w.report("convexity", 0.0, false, "(1-t)F(p) + tF(q) - F(gamma(t)) + 1e-8").with("radius", ball.radius))
}

/// F(q) ⪯ F(p) implies JF(p)(log_p q) ⪯ 1e-8 on the ball.
pub fn probe_prop1(objective: &VectorObjective, ball: &Ball, samples: usize, seed: u64) -> Result<CheckReport> {
    let pairs = geodesic_samples(ball, samples, seed)?;
    let mut w = Worst::default();
    for (p, q) in &pairs {
        for (a, b) in [(p, q), (q, p)] {
            if leq(&objective.evaluate(b)?, &objective.evaluate(a)?)? {
                let jf = objective.jacobian_action(a, &a.log(b)?)?;
                w.observe(PROBE_SLACK - jf.max(), None);
            }
        }
    }
    if w.count == 0 {
        return Ok(CheckReport::inconclusive("prop1", "no dominating pairs sampled"));
    }
    Ok(w.report("prop1", 0.0, false, "1e-8 - max_i <grad f_i(p), log_p q> over pairs with F(q) <= F(p)"))
}

/// Σαᵢfᵢ is quasi-convex along the sampled geodesics for sampled simplex
/// weights exactly when the vector probe passes on the same geodesics.
pub fn probe_scalarization(objective: &VectorObjective, ball: &Ball, samples: usize, seed: u64) -> Result<CheckReport> {
    let pairs = geodesic_samples(ball, samples, seed)?;
    let vector_ok = quasi_convex_margin(|x| objective.evaluate(x), &pairs)? + PROBE_SLACK >= 0.0;
    let mut r = rng(seed ^ 0x5ca1);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let raw: Vec<f64> = (0..objective.len()).map(|_| -r.gen::<f64>().max(1e-12).ln()).collect();
        let total: f64 = raw.iter().sum();
        let a = DVector::from_iterator(raw.len(), raw.iter().map(|x| x / total));
        let m = quasi_convex_margin(|x| Ok(DVector::from_element(1, objective.evaluate(x)?.dot(&a))), &pairs)?;
        worst = worst.min(m);
    }
    let scalar_ok = worst + PROBE_SLACK >= 0.0;
    let mut rep = CheckReport::new(
        "scalarization",
        if scalar_ok == vector_ok { Status::Pass } else { Status::Fail },
        format!("vector probe {}, scalarized probe {}", pass_word(vector_ok), pass_word(scalar_ok)),
    );
    rep.worst_margin = Some(worst + PROBE_SLACK);
    Ok(rep)
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "passes"
    } else {
        "fails"
    }
}

/// ‖∇fᵢ(p) − P_{q→p}∇fᵢ(q)‖ ≤ L·d(p, q) on sampled pairs.
pub fn probe_gradient_lipschitz(objective: &VectorObjective, ball: &Ball, l: f64, samples: usize, seed: u64) -> Result<CheckReport> {
    let pairs = geodesic_samples(ball, samples, seed)?;
    let mut w = Worst::default();
    for (p, q) in &pairs {
        let d = p.dist(q)?;
        if d < 1e-6 {
            continue;
        }
        let (gp, gq) = (objective.gradients(p)?, objective.gradients(q)?);
        for (a, b) in gp.iter().zip(&gq) {
            let moved = q.transport(p, b)?;
            let diff = TangentVector::combination(&[a.clone(), moved], &[1.0, -1.0])?.norm();
            w.observe(l * d * (1.0 + 1e-9) + 1e-12 - diff, None);
        }
    }
    Ok(w.report("gradient_lipschitz", 0.0, false, "L d(p,q) - |grad f_i(p) - P grad f_i(q)|").with("lipschitz", l))
}

/// |φ̂(p) − φ̂(p′)| ≤ L̂·d(p, p′), with L̂ the largest sampled gradient norm.
pub fn probe_phi_lipschitz(objective: &VectorObjective, oracle: &MeritOracle, ball: &Ball, samples: usize, seed: u64) -> Result<CheckReport> {
    let pairs = geodesic_samples(ball, samples, seed)?;
    let mut l_hat: f64 = 0.0;
    for (p, q) in &pairs {
        for x in [p, q] {
            for g in objective.gradients(x)? {
                l_hat = l_hat.max(g.norm());
            }
        }
    }
    // the bound on each pair also covers gradient norms along its geodesic
    let mut w = Worst::default();
    for (p, q) in &pairs {
        let d = p.dist(q)?;
        let gap = (oracle.phi(objective, p)? - oracle.phi(objective, q)?).abs();
        let along = {
            let v = p.log(q)?;
            TS.iter()
                .map(|&t| objective.gradients(&p.exp(&v, t)?).map(|g| g.iter().map(|x| x.norm()).fold(0.0, f64::max)))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(l_hat, f64::max)
        };
        w.observe(along * d + 1e-12 - gap, None);
    }
    Ok(w.report("phi_lipschitz", 0.0, false, "L_hat d(p,q) - |phi(p) - phi(q)|").with("l_hat", l_hat))
}

/// φ̂ vanishes (up to slack) at declared weak Pareto points.
pub fn probe_weak_pareto(objective: &VectorObjective, oracle: &MeritOracle, points: &[ManifoldPoint]) -> Result<CheckReport> {
    let mut w = Worst::default();
    for p in points {
        let phi = oracle.phi(objective, p)?;
        w.observe(oracle.slack() - phi.abs(), None);
    }
    Ok(w.report("weak_pareto", 0.0, false, "slack - |phi(p*)| at declared Pareto points").with("slack", oracle.slack()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_constants() {
        assert_eq!(hbar(0.0), 1.0);
        assert!((2.0 * hbar(1.0) - 2.0 * 1f64.tanh()).abs() < 1e-15);
        assert!(hbar(1.0) > 0.75);
        assert!(hbar(2.0) < hbar(1.0));
    }

    #[test]
    fn report_json_shape() {
        let mut w = Worst::default();
        w.observe(0.5, Some(3));
        w.observe(-0.25, Some(7));
        let r = w.report("demo", 0.0, false, "x").with("c", 1.0);
        assert_eq!(r.status, Status::Fail);
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["status"], "FAIL");
        assert_eq!(j["worst_margin"], -0.25);
        assert_eq!(j["k_at_worst"], 7);
        assert_eq!(j["constants"]["c"], 1.0);
    }

    #[test]
    fn nan_margins_fail() {
        let mut w = Worst::default();
        w.observe(f64::NAN, None);
        assert_eq!(w.report("x", 0.0, false, "").status, Status::Fail);
    }
}
