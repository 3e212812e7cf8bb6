//! Test problems with declared structural flags. Every flag is re-verified
//! by a harness probe before the suite relies on it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{spd_coords, Manifold, ManifoldPoint};
use crate::merit::{geodesic_grid, MeritOracle};
use crate::objective::{FnComponent, HalfSquaredDistance, LinearFunctional, VectorObjective};

/// Geodesic ball B(center, radius).
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: ManifoldPoint,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: ManifoldPoint, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, p: &ManifoldPoint) -> bool {
        p.dist(&self.center).map_or(false, |d| d <= self.radius)
    }
}

/// Where the supremum defining φ is sought.
#[derive(Clone, Debug)]
pub enum ReferenceSet {
    /// The weak Pareto set is this geodesic segment; it is gridded at the
    /// configured resolution.
    Segment { from: ManifoldPoint, to: ManifoldPoint },
    /// The supremum is attained on these points, so φ̂ = φ.
    Exact(Vec<ManifoldPoint>),
}

/// A shipped problem and its declared properties.
#[derive(Clone, Debug)]
pub struct Problem {
    pub id: &'static str,
    pub description: &'static str,
    pub objective: VectorObjective,
    pub convex: bool,
    /// Sublevel sets of every start point are bounded.
    pub coercive: bool,
    pub quasi_convex_ball: Option<Ball>,
    pub kl_ball: Option<Ball>,
    /// Closed-form KL constant on `kl_ball`, when known.
    pub known_alpha: Option<f64>,
    /// Gradient-Lipschitz constant valid on the sublevel set of `start_ball`.
    pub gradient_lipschitz: Option<f64>,
    /// Lipschitz constant of each fᵢ on the reference set.
    pub value_lipschitz: f64,
    pub reference: ReferenceSet,
    pub start_ball: Ball,
    pub default_start: ManifoldPoint,
    /// A constant step satisfying sufficient decrease for β = ½ and σ ≤ ½.
    pub constant_step: Option<f64>,
    pub tol_critical: f64,
    pub critical_point: Option<ManifoldPoint>,
}

/// Serializable description used in reports.
#[derive(Clone, Debug, Serialize)]
pub struct ProblemInfo {
    pub id: String,
    pub description: String,
    pub manifold: Manifold,
    pub n_objectives: usize,
    pub convex: bool,
    pub coercive: bool,
    pub quasi_convex_radius: Option<f64>,
    pub kl_radius: Option<f64>,
    pub known_alpha: Option<f64>,
    pub gradient_lipschitz: Option<f64>,
    pub value_lipschitz: f64,
    pub constant_step: Option<f64>,
    pub tol_critical: f64,
}

impl Problem {
    pub fn manifold(&self) -> Manifold {
        self.objective.manifold()
    }

    /// φ̂ oracle; `resolution` is the grid spacing along segment references.
    pub fn oracle(&self, resolution: f64) -> Result<MeritOracle> {
        match &self.reference {
            ReferenceSet::Segment { from, to } => {
                let grid = geodesic_grid(from, to, resolution)?;
                MeritOracle::new(&self.objective, grid, resolution, self.value_lipschitz)
            }
            ReferenceSet::Exact(points) => {
                Ok(MeritOracle::new(&self.objective, points.clone(), 0.0, self.value_lipschitz)?.exact())
            }
        }
    }

    /// Reference points useful as dominating candidates.
    pub fn reference_points(&self, resolution: f64) -> Result<Vec<ManifoldPoint>> {
        match &self.reference {
            ReferenceSet::Segment { from, to } => geodesic_grid(from, to, resolution),
            ReferenceSet::Exact(points) => Ok(points.clone()),
        }
    }

    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            id: self.id.to_string(),
            description: self.description.to_string(),
            manifold: self.manifold(),
            n_objectives: self.objective.len(),
            convex: self.convex,
            coercive: self.coercive,
            quasi_convex_radius: self.quasi_convex_ball.as_ref().map(|b| b.radius),
            kl_radius: self.kl_ball.as_ref().map(|b| b.radius),
            known_alpha: self.known_alpha,
            gradient_lipschitz: self.gradient_lipschitz,
            value_lipschitz: self.value_lipschitz,
            constant_step: self.constant_step,
            tol_critical: self.tol_critical,
        }
    }
}

fn pt(m: Manifold, c: &[f64]) -> ManifoldPoint {
    ManifoldPoint::from_slice(m, c).expect("shipped point is valid")
}

/// f = ½x² on ℝ.
pub fn scalar_quadratic() -> Problem {
    let m = Manifold::Euclidean { dim: 1 };
    let zero = pt(m, &[0.0]);
    Problem {
        id: "scalar",
        description: "half square on the real line",
        objective: VectorObjective::new("scalar", m).with(HalfSquaredDistance::new(zero.clone())),
        convex: true,
        coercive: true,
        quasi_convex_ball: Some(Ball::new(zero.clone(), 2.0)),
        kl_ball: Some(Ball::new(zero.clone(), 1.0)),
        known_alpha: Some(2.0),
        gradient_lipschitz: Some(1.0),
        value_lipschitz: 1.0,
        reference: ReferenceSet::Exact(vec![zero.clone()]),
        start_ball: Ball::new(zero.clone(), 1.0),
        default_start: pt(m, &[1.0]),
        constant_step: Some(0.5),
        tol_critical: 1e-8,
        critical_point: Some(zero),
    }
}

/// (½‖x‖², ½‖x − 2e₁‖²) on ℝ².
pub fn p1() -> Problem {
    let m = Manifold::Euclidean { dim: 2 };
    let a = pt(m, &[0.0, 0.0]);
    let b = pt(m, &[2.0, 0.0]);
    let mid = pt(m, &[1.0, 0.0]);
    Problem {
        id: "p1",
        description: "Euclidean bi-quadratic with Pareto segment [0, 2e1]",
        objective: VectorObjective::new("p1", m)
            .with(HalfSquaredDistance::new(a.clone()))
            .with(HalfSquaredDistance::new(b.clone())),
        convex: true,
        coercive: true,
        quasi_convex_ball: Some(Ball::new(mid.clone(), 3.0)),
        kl_ball: Some(Ball::new(mid.clone(), 2.0)),
        known_alpha: Some(2.0),
        gradient_lipschitz: Some(1.0),
        value_lipschitz: 2.0,
        reference: ReferenceSet::Segment { from: a, to: b },
        start_ball: Ball::new(mid.clone(), 2.0),
        default_start: pt(m, &[2.2, 1.4]),
        constant_step: Some(0.5),
        tol_critical: 1e-6,
        critical_point: Some(mid),
    }
}

/// (−⟨e₁, p⟩, −⟨e₂, p⟩) on S².
pub fn p2() -> Problem {
    let m = Manifold::Sphere { dim: 2 };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mid = pt(m, &[s, s, 0.0]);
    let lift = mid.tangent(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    Problem {
        id: "p2",
        description: "sphere linear pair, convex on a ball around the Pareto arc midpoint",
        objective: VectorObjective::new("p2", m)
            .with(LinearFunctional { a: DVector::from_vec(vec![-1.0, 0.0, 0.0]) })
            .with(LinearFunctional { a: DVector::from_vec(vec![0.0, -1.0, 0.0]) }),
        convex: true,
        coercive: true,
        quasi_convex_ball: Some(Ball::new(mid.clone(), 0.6)),
        kl_ball: None,
        known_alpha: None,
        gradient_lipschitz: Some(1.0),
        value_lipschitz: 1.0,
        reference: ReferenceSet::Segment { from: pt(m, &[1.0, 0.0, 0.0]), to: pt(m, &[0.0, 1.0, 0.0]) },
        start_ball: Ball::new(mid.clone(), 0.5),
        default_start: mid.exp(&lift, 0.45).unwrap(),
        constant_step: Some(0.5),
        tol_critical: 1e-6,
        critical_point: Some(mid),
    }
}

/// Anchors of the hyperboloid pair, ±0.6 from the apex along the first axis.
pub fn p3_anchors() -> (ManifoldPoint, ManifoldPoint) {
    let m = Manifold::Hyperboloid { dim: 2, curvature: -1.0 };
    let (c, s) = (0.6f64.cosh(), 0.6f64.sinh());
    (pt(m, &[c, s, 0.0]), pt(m, &[c, -s, 0.0]))
}

/// (½d²(·, a₁), ½d²(·, a₂)) on the hyperbolic plane.
pub fn p3() -> Problem {
    let m = Manifold::Hyperboloid { dim: 2, curvature: -1.0 };
    let (a1, a2) = p3_anchors();
    let apex = pt(m, &[1.0, 0.0, 0.0]);
    let up = apex.tangent(DVector::from_vec(vec![0.0, 0.2, 1.0])).unwrap();
    // Start points are within 0.8 of the apex, hence within 1.4 of each
    // anchor, and ½d² has Hessian norm ≤ d coth d there.
    let reach: f64 = 1.4;
    Problem {
        id: "p3",
        description: "hyperbolic distance pair with Pareto set the segment [a1, a2]",
        objective: VectorObjective::new("p3", m)
            .with(HalfSquaredDistance::new(a1.clone()))
            .with(HalfSquaredDistance::new(a2.clone())),
        convex: true,
        coercive: true,
        quasi_convex_ball: Some(Ball::new(apex.clone(), 1.0)),
        kl_ball: None,
        known_alpha: None,
        gradient_lipschitz: Some(reach / reach.tanh()),
        value_lipschitz: 1.2,
        reference: ReferenceSet::Segment { from: a1, to: a2 },
        start_ball: Ball::new(apex.clone(), 0.8),
        default_start: apex.exp(&up, 0.7 / up.norm()).unwrap(),
        constant_step: Some(0.3),
        tol_critical: 1e-6,
        critical_point: Some(apex),
    }
}

/// Anchors of the SPD pair.
pub fn p4_anchors() -> (ManifoldPoint, ManifoldPoint) {
    let m = Manifold::Spd { size: 2 };
    let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let a2 = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
    (m.point(spd_coords(&a1)).unwrap(), m.point(spd_coords(&a2)).unwrap())
}

/// (½d²(·, A₁), ½d²(·, A₂)) on SPD(2) with the affine-invariant metric.
pub fn p4() -> Problem {
    let m = Manifold::Spd { size: 2 };
    let (a1, a2) = p4_anchors();
    let span = a1.dist(&a2).unwrap();
    let mid = a1.exp(&a1.log(&a2).unwrap(), 0.5).unwrap();
    let radius = 0.6;
    let off = mid.tangent(DVector::from_vec(vec![0.3, 0.5, 0.5, -0.2])).unwrap();
    // Curvature lies in [−½, 0], so ½d² has Hessian norm ≤ s coth s with
    // s = d/√2 and d bounded by the start-ball reach.
    let s = (0.5 * span + radius) * std::f64::consts::FRAC_1_SQRT_2;
    Problem {
        id: "p4",
        description: "SPD(2) distance pair with Pareto set the geodesic [A1, A2]",
        objective: VectorObjective::new("p4", m)
            .with(HalfSquaredDistance::new(a1.clone()))
            .with(HalfSquaredDistance::new(a2.clone())),
        convex: true,
        coercive: true,
        quasi_convex_ball: Some(Ball::new(mid.clone(), 0.8)),
        kl_ball: None,
        known_alpha: None,
        gradient_lipschitz: Some(s / s.tanh()),
        value_lipschitz: span,
        reference: ReferenceSet::Segment { from: a1, to: a2 },
        start_ball: Ball::new(mid.clone(), radius),
        default_start: mid.exp(&off, 0.5 / off.norm()).unwrap(),
        constant_step: Some(0.3),
        tol_critical: 1e-6,
        critical_point: Some(mid),
    }
}

fn bump(x: f64) -> f64 {
    x * x + 5.0 * x.sin().powi(2)
}

fn bump_prime(x: f64) -> f64 {
    2.0 * x + 5.0 * (2.0 * x).sin()
}

/// (g(x) + 4y², g(x) + 6y²) on ℝ² with g(x) = x² + 5 sin²x. The bump g has
/// further local minima, so F is not quasi-convex on large balls; the origin
/// is the only weak Pareto point and φ = f₁.
pub fn p5() -> Problem {
    let m = Manifold::Euclidean { dim: 2 };
    let zero = pt(m, &[0.0, 0.0]);
    let comp = |c: f64| {
        FnComponent::new(
            move |x| bump(x[0]) + c * x[1] * x[1],
            move |x| DVector::from_vec(vec![bump_prime(x[0]), 2.0 * c * x[1]]),
        )
    };
    Problem {
        id: "p5",
        description: "non-quasi-convex pair with an isolated Pareto optimum at the origin",
        objective: VectorObjective::new("p5", m).with(comp(4.0)).with(comp(6.0)),
        convex: false,
        coercive: true,
        quasi_convex_ball: None,
        kl_ball: Some(Ball::new(zero.clone(), 0.5)),
        known_alpha: None,
        gradient_lipschitz: Some(12.0),
        value_lipschitz: 12.0,
        reference: ReferenceSet::Exact(vec![zero.clone()]),
        start_ball: Ball::new(zero.clone(), 0.3),
        default_start: pt(m, &[0.25, 0.15]),
        constant_step: Some(0.05),
        tol_critical: 1e-8,
        critical_point: Some(zero),
    }
}

pub fn shipped_problems() -> Vec<Problem> {
    vec![scalar_quadratic(), p1(), p2(), p3(), p4(), p5()]
}

pub fn problem(id: &str) -> Result<Problem> {
    shipped_problems()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::UnknownProblem(id.to_string()))
}
