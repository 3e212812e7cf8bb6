//! The direction subproblem
//!
//! ```text
//! min_v  α_p(v) = max_i ⟨∇fᵢ(p), v⟩ + ½‖v‖²
//! ```
//!
//! solved through its dual, the minimum-norm point of conv{∇fᵢ(p)}: if λ
//! minimizes ‖Σλᵢ∇fᵢ(p)‖² over the simplex then v(p) = −Σλᵢ∇fᵢ(p) and
//! α*_p = −½‖v(p)‖². Every returned v is built as −Σλᵢ∇fᵢ(p), so
//! −½‖v‖² is always a weak-duality lower bound on α*_p.
//!
//! All work happens on the n×n Gram matrix of the gradients, so the cost per
//! iteration does not depend on the manifold dimension.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldPoint, TangentVector};

/// Indices whose inner product is within this of the max form the active set.
pub const ACTIVE_TOL: f64 = 1e-10;

/// Default duality-gap tolerance for exact solves.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_WOLFE_ITERS: usize = 1000;
const MAX_POLISH_ITERS: usize = 20_000;

/// Outcome of a direction solve.
#[derive(Clone, Debug)]
pub struct DirectionResult {
    pub v: TangentVector,
    /// Simplex weights with v = −Σλᵢ∇fᵢ(p).
    pub weights: DVector<f64>,
    /// α_p(v).
    pub alpha_value: f64,
    /// −½‖v‖² ≤ α*_p.
    pub alpha_star_lower: f64,
    pub sigma_certified: bool,
    /// Indices attaining max_i ⟨∇fᵢ(p), v⟩.
    pub active_set: Vec<usize>,
    /// Inner iterations spent (major steps of the dual method).
    pub iterations: usize,
}

impl DirectionResult {
    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    /// α_p(v) − (−½‖v‖²), an upper bound on the suboptimality α_p(v) − α*_p.
    pub fn duality_gap(&self) -> f64 {
        self.alpha_value - self.alpha_star_lower
    }
}

/// Whether the exact solve or an early-terminated approximation is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionMode {
    #[default]
    Exact,
    SigmaApprox,
}

/// α_p(v) = max_i ⟨∇fᵢ(p), v⟩ + ½‖v‖².
pub fn alpha(p: &ManifoldPoint, gradients: &[TangentVector], v: &TangentVector) -> Result<f64> {
    check_inputs(p, gradients)?;
    if v.base() != p {
        return Err(Error::BaseMismatch);
    }
    Ok(alpha_unchecked(gradients, v))
}

fn alpha_unchecked(gradients: &[TangentVector], v: &TangentVector) -> f64 {
    max_inner(gradients, v) + 0.5 * v.norm_squared()
}

fn max_inner(gradients: &[TangentVector], v: &TangentVector) -> f64 {
    gradients
        .iter()
        .map(|g| g.inner_unchecked(v))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_inputs(p: &ManifoldPoint, gradients: &[TangentVector]) -> Result<()> {
    if gradients.is_empty() {
        return Err(Error::InvalidArgument("no gradients".into()));
    }
    for (i, g) in gradients.iter().enumerate() {
        if g.base() != p {
            return Err(Error::BaseMismatch);
        }
        if g.coords().iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation { index: i });
        }
    }
    Ok(())
}

fn gram(gradients: &[TangentVector]) -> DMatrix<f64> {
    let n = gradients.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = gradients[i].inner_unchecked(&gradients[j]);
            g[(i, j)] = x;
            g[(j, i)] = x;
        }
    }
    g
}

fn argmin(x: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i] < x[best] {
            best = i;
        }
    }
    best
}

/// Frank-Wolfe gap ‖w‖² − min_j ⟨gⱼ, w⟩ at weights λ, together with the
/// minimizing vertex and ‖w‖².
fn fw_gap(g: &DMatrix<f64>, lambda: &DVector<f64>) -> (f64, usize, f64) {
    let x = g * lambda;
    let q = lambda.dot(&x).max(0.0);
    let j = argmin(&x);
    (q - x[j], j, q)
}

/// Minimizer of μᵀ G_SS μ subject to Σμ = 1 via the KKT system.
fn affine_minimizer(g: &DMatrix<f64>, s: &[usize]) -> DVector<f64> {
    let k = s.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for (a, &i) in s.iter().enumerate() {
        for (b, &j) in s.iter().enumerate() {
            kkt[(a, b)] = g[(i, j)];
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let svd = kkt.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max().max(1.0);
    let sol = svd.solve(&rhs, eps).unwrap_or_else(|_| {
        let mut uniform = DVector::from_element(k + 1, 1.0 / k as f64);
        uniform[k] = 0.0;
        uniform
    });
    let mu = sol.rows(0, k).into_owned();
    let total = mu.sum();
    if total.is_finite() && total.abs() > 1e-300 {
        mu / total
    } else {
        DVector::from_element(k, 1.0 / k as f64)
    }
}

/// Wolfe's minimum-norm-point method. Returns full-length weights and the
/// number of major iterations.
fn wolfe(g: &DMatrix<f64>, tol: f64) -> (DVector<f64>, usize) {
    let n = g.nrows();
    let start = argmin(&g.diagonal());
    let mut s = vec![start];
    let mut lam = vec![1.0];
    let mut iters = 0;

    let full = |s: &[usize], lam: &[f64]| {
        let mut out = DVector::zeros(n);
        for (&i, &l) in s.iter().zip(lam) {
            out[i] = l;
        }
        out
    };

    while iters < MAX_WOLFE_ITERS {
        iters += 1;
        let weights = full(&s, &lam);
        let (gap, j, q) = fw_gap(g, &weights);
        if gap <= tol * q.max(1.0) || s.contains(&j) {
            break;
        }
        s.push(j);
        lam.push(0.0);

        loop {
            let mu = affine_minimizer(g, &s);
            if mu.iter().all(|&m| m > 1e-14) {
                lam = mu.iter().copied().collect();
                break;
            }
            // Move towards μ until a weight hits zero, then drop it.
            let mut theta = f64::INFINITY;
            let mut drop = 0;
            for a in 0..s.len() {
                if mu[a] <= 1e-14 {
                    let denom = lam[a] - mu[a];
                    let th = if denom > 0.0 { lam[a] / denom } else { 0.0 };
                    if th < theta {
                        theta = th;
                        drop = a;
                    }
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for a in 0..s.len() {
                lam[a] = (1.0 - theta) * lam[a] + theta * mu[a];
            }
            lam[drop] = 0.0;
            let keep: Vec<usize> = (0..s.len()).filter(|&a| lam[a] > 1e-14).collect();
            if keep.is_empty() {
                s = vec![s[drop]];
                lam = vec![1.0];
                break;
            }
            s = keep.iter().map(|&a| s[a]).collect();
            lam = keep.iter().map(|&a| lam[a]).collect();
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|l| *l /= total);
            if s.len() == 1 {
                lam[0] = 1.0;
                break;
            }
        }
    }
    (full(&s, &lam), iters)
}

/// Away-step Frank-Wolfe polishing, used when Wolfe's method stalls on
/// degenerate input.
fn polish(g: &DMatrix<f64>, mut lam: DVector<f64>, tol: f64) -> DVector<f64> {
    for _ in 0..MAX_POLISH_ITERS {
        let x = g * &lam;
        let q = lam.dot(&x);
        let j = argmin(&x);
        if q - x[j] <= tol * q.max(1.0) {
            break;
        }
        let mut away = None;
        for i in 0..lam.len() {
            if lam[i] > 0.0 && away.map_or(true, |a: usize| x[i] > x[a]) {
                away = Some(i);
            }
        }
        let a = away.unwrap_or(j);
        let fw_dir = q - x[j];
        let away_dir = x[a] - q;
        let (d, max_step) = if fw_dir >= away_dir || lam[a] >= 1.0 {
            let mut d = -lam.clone();
            d[j] += 1.0;
            (d, 1.0)
        } else {
            let mut d = lam.clone();
            d[a] -= 1.0;
            (d, lam[a] / (1.0 - lam[a]))
        };
        let gd = g * &d;
        let curv = d.dot(&gd);
        let slope = lam.dot(&gd);
        if curv <= 0.0 {
            break;
        }
        let step = (-slope / curv).clamp(0.0, max_step);
        if step == 0.0 {
            break;
        }
        lam += d * step;
        lam.iter_mut().for_each(|l| *l = l.max(0.0));
        let total = lam.sum();
        lam /= total;
    }
    lam
}

fn assemble(
    p: &ManifoldPoint,
    gradients: &[TangentVector],
    weights: DVector<f64>,
    iterations: usize,
) -> Result<DirectionResult> {
    let v = TangentVector::combination(gradients, weights.as_slice())?.scaled(-1.0);
    let inners: Vec<f64> = gradients.iter().map(|g| g.inner_unchecked(&v)).collect();
    let top = inners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nsq = v.norm_squared();
    let thresh = ACTIVE_TOL * top.abs().max(1.0);
    let active_set = (0..inners.len()).filter(|&i| top - inners[i] <= thresh).collect();
    debug_assert!(v.base() == p);
    Ok(DirectionResult {
        v,
        weights,
        alpha_value: top + 0.5 * nsq,
        alpha_star_lower: -0.5 * nsq,
        sigma_certified: false,
        active_set,
        iterations,
    })
}

fn all_zero(gradients: &[TangentVector]) -> bool {
    gradients.iter().all(|g| g.coords().iter().all(|&x| x == 0.0))
}

fn zero_result(p: &ManifoldPoint, n: usize) -> DirectionResult {
    DirectionResult {
        v: p.zero_tangent(),
        weights: DVector::from_element(n, 1.0 / n as f64),
        alpha_value: 0.0,
        alpha_star_lower: 0.0,
        sigma_certified: true,
        active_set: (0..n).collect(),
        iterations: 0,
    }
}

/// The exact steepest descent direction v(p), with duality gap at most
/// tol·max(1, ‖v‖²).
pub fn solve_exact(p: &ManifoldPoint, gradients: &[TangentVector], tol: f64) -> Result<DirectionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("solver tolerance must be positive".into()));
    }
    check_inputs(p, gradients)?;
    let n = gradients.len();
    if all_zero(gradients) {
        return Ok(zero_result(p, n));
    }
    let g = gram(gradients);
    let (mut lam, iters) = wolfe(&g, tol);
    let (gap, _, q) = fw_gap(&g, &lam);
    if gap > tol * q.max(1.0) {
        lam = polish(&g, lam, tol);
    }
    let mut out = assemble(p, gradients, lam, iters)?;
    out.sigma_certified = true;
    Ok(out)
}

/// A σ-approximate direction: Frank-Wolfe on the dual, started at the
/// shortest gradient and stopped as soon as α_p(v) ≤ (1−σ)(−½‖v‖²).
/// Falls back to [`solve_exact`] when the budget runs out.
pub fn solve_sigma_approx(
    p: &ManifoldPoint,
    gradients: &[TangentVector],
    sigma: f64,
    max_inner_iters: usize,
) -> Result<DirectionResult> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::InvalidArgument(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    check_inputs(p, gradients)?;
    let n = gradients.len();
    if all_zero(gradients) {
        return Ok(zero_result(p, n));
    }
    if sigma == 0.0 {
        return solve_exact(p, gradients, DEFAULT_TOL);
    }
    let g = gram(gradients);
    let mut lam = DVector::zeros(n);
    lam[argmin(&g.diagonal())] = 1.0;
    for it in 0..=max_inner_iters {
        let (gap, j, q) = fw_gap(&g, &lam);
        if gap <= 0.5 * sigma * q {
            let mut out = assemble(p, gradients, lam.clone(), it)?;
            if out.alpha_value <= (1.0 - sigma) * out.alpha_star_lower {
                out.sigma_certified = true;
                return Ok(out);
            }
        }
        if it == max_inner_iters {
            break;
        }
        // Exact line search on the segment towards vertex j.
        let gjj = g[(j, j)];
        let xj = (&g * &lam)[j];
        let curv = q - 2.0 * xj + gjj;
        let step = if curv > 0.0 { (gap / curv).clamp(0.0, 1.0) } else { 1.0 };
        lam *= 1.0 - step;
        lam[j] += step;
    }
    let mut out = solve_exact(p, gradients, DEFAULT_TOL)?;
    out.sigma_certified = out.alpha_value <= (1.0 - sigma) * out.alpha_star_lower;
    Ok(out)
}

/// −½ min ‖Σλᵢgᵢ‖² over the simplex grid {λ = k/N}. Approaches α*_p from
/// below as N grows. The last two coordinates are minimized exactly over
/// their integer split, so n = 4 costs O(N²) evaluations.
pub fn brute_force_alpha_star(gradients: &[TangentVector], grid_steps: usize) -> Result<f64> {
    let n = gradients.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no gradients".into()));
    }
    if n > 4 {
        return Err(Error::Unsupported(format!("brute force over {n} gradients (max 4)")));
    }
    if grid_steps < 100 {
        return Err(Error::InvalidArgument(format!("grid_steps {grid_steps} < 100")));
    }
    let base = gradients[0].base();
    check_inputs(base, gradients)?;
    let g = gram(gradients);
    Ok(-0.5 * grid_min_quadratic(&g, grid_steps))
}

fn grid_min_quadratic(g: &DMatrix<f64>, big_n: usize) -> f64 {
    let n = g.nrows();
    if n == 1 {
        return g[(0, 0)];
    }
    let mut gm = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..n {
            gm[i][j] = g[(i, j)];
        }
    }
    let nf = big_n as f64;
    let mut best = f64::INFINITY;
    // odometer over the first n−2 coordinates (at most two)
    let (lim0, lim1) = match n {
        2 => (0, 0),
        3 => (big_n, 0),
        _ => (big_n, big_n),
    };
    for k0 in 0..=lim0 {
        for k1 in 0..=lim1.min(big_n - k0) {
            let mut lam = [0.0; 4];
            let prefix = [k0, k1];
            for i in 0..n - 2 {
                lam[i] = prefix[i] as f64 / nf;
            }
            best = best.min(split_min(&gm, n, lam, big_n - k0 - k1, nf));
        }
    }
    best
}

fn quad(g: &[[f64; 4]; 4], n: usize, l: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += g[i][j] * l[j];
        }
        s += l[i] * row;
    }
    s
}

/// Minimum over a ∈ {0..rest} of the quadratic with the last two weights
/// (a, rest−a)/N and the first n−2 fixed.
fn split_min(g: &[[f64; 4]; 4], n: usize, lam: [f64; 4], rest: usize, nf: f64) -> f64 {
    let (y, z) = (n - 2, n - 1);
    let eval = |a: usize| {
        let mut l = lam;
        l[y] = a as f64 / nf;
        l[z] = (rest - a) as f64 / nf;
        quad(g, n, &l)
    };
    // q(a) is a convex quadratic in a; locate its continuous minimizer.
    let mut base = lam;
    base[z] = rest as f64 / nf;
    let curv = g[y][y] - 2.0 * g[y][z] + g[z][z];
    let slope: f64 = 2.0 * (0..n).map(|i| base[i] * (g[i][y] - g[i][z])).sum::<f64>();
    if curv > 0.0 {
        let s = (-slope / (2.0 * curv) * nf).clamp(0.0, rest as f64);
        eval(s.floor() as usize).min(eval((s.ceil() as usize).min(rest)))
    } else {
        eval(0).min(eval(rest))
    }
}
