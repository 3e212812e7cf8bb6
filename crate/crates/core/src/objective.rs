//! Vector-valued objectives F = (f₁, …, fₙ) on a manifold, their Riemannian
//! Jacobian, and the componentwise partial order on ℝⁿ.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::direction;
use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint, TangentVector};

/// One scalar component fᵢ with its analytic Riemannian gradient.
pub trait Component: Send + Sync {
    fn value(&self, p: &ManifoldPoint) -> f64;
    fn gradient(&self, p: &ManifoldPoint) -> Result<TangentVector>;
}

/// f(p) = ½ w d²(p, anchor); ∇f(p) = −w log_p(anchor).
#[derive(Clone, Debug)]
pub struct HalfSquaredDistance {
    pub anchor: ManifoldPoint,
    pub weight: f64,
}

impl HalfSquaredDistance {
    pub fn new(anchor: ManifoldPoint) -> Self {
        Self { anchor, weight: 1.0 }
    }
}

impl Component for HalfSquaredDistance {
    fn value(&self, p: &ManifoldPoint) -> f64 {
        match p.dist(&self.anchor) {
            Ok(d) => 0.5 * self.weight * d * d,
            Err(_) => f64::NAN,
        }
    }

    fn gradient(&self, p: &ManifoldPoint) -> Result<TangentVector> {
        Ok(p.log(&self.anchor)?.scaled(-self.weight))
    }
}

/// f(p) = ⟨a, p⟩ in ambient coordinates, restricted to a Euclidean space or a
/// sphere. The Riemannian gradient is the tangential projection of `a`.
#[derive(Clone, Debug)]
pub struct LinearFunctional {
    pub a: DVector<f64>,
}

impl Component for LinearFunctional {
    fn value(&self, p: &ManifoldPoint) -> f64 {
        self.a.dot(p.coords())
    }

    fn gradient(&self, p: &ManifoldPoint) -> Result<TangentVector> {
        match p.manifold() {
            Manifold::Euclidean { .. } | Manifold::Sphere { .. } => {
                TangentVector::projected(p.clone(), self.a.clone())
            }
            other => Err(Error::Unsupported(format!(
                "linear functional on {other:?}"
            ))),
        }
    }
}

type ValueFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// Component given by closures over ambient coordinates. The gradient closure
/// returns the ambient (Euclidean) gradient, which is projected onto the
/// tangent space; on Euclidean spaces and spheres this is the Riemannian gradient.
#[derive(Clone)]
pub struct FnComponent {
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl FnComponent {
    pub fn new(
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl Component for FnComponent {
    fn value(&self, p: &ManifoldPoint) -> f64 {
        (self.value)(p.coords())
    }

    fn gradient(&self, p: &ManifoldPoint) -> Result<TangentVector> {
        TangentVector::projected(p.clone(), (self.gradient)(p.coords()))
    }
}

/// F = (fᵢ)_{i∈I}. Immutable after construction and cheap to clone.
#[derive(Clone)]
pub struct VectorObjective {
    name: String,
    manifold: Manifold,
    components: Vec<Arc<dyn Component>>,
}

impl fmt::Debug for VectorObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorObjective")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .field("n", &self.components.len())
            .finish()
    }
}

impl VectorObjective {
    pub fn new(name: impl Into<String>, manifold: Manifold) -> Self {
        Self {
            name: name.into(),
            manifold,
            components: Vec::new(),
        }
    }

    pub fn with(mut self, c: impl Component + 'static) -> Self {
        self.components.push(Arc::new(c));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    /// Number of components n.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn check_point(&self, p: &ManifoldPoint) -> Result<()> {
        if p.manifold() == self.manifold {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch(format!(
                "objective `{}` lives on {:?}, point on {:?}",
                self.name,
                self.manifold,
                p.manifold()
            )))
        }
    }

    /// F(p).
    pub fn evaluate(&self, p: &ManifoldPoint) -> Result<DVector<f64>> {
        self.check_point(p)?;
        let mut out = DVector::zeros(self.len());
        for (i, c) in self.components.iter().enumerate() {
            let v = c.value(p);
            if !v.is_finite() {
                return Err(Error::Evaluation { index: i });
            }
            out[i] = v;
        }
        Ok(out)
    }

    /// (∇fᵢ(p))_{i∈I}.
    pub fn gradients(&self, p: &ManifoldPoint) -> Result<Vec<TangentVector>> {
        self.check_point(p)?;
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let g = c.gradient(p)?;
                if g.base() != p {
                    return Err(Error::BaseMismatch);
                }
                if g.coords().iter().any(|x| !x.is_finite()) {
                    return Err(Error::Evaluation { index: i });
                }
                Ok(g)
            })
            .collect()
    }

    /// JF(p)(v) = (⟨∇fᵢ(p), v⟩)_{i∈I}.
    pub fn jacobian_action(&self, p: &ManifoldPoint, v: &TangentVector) -> Result<DVector<f64>> {
        if v.base() != p {
            return Err(Error::BaseMismatch);
        }
        let grads = self.gradients(p)?;
        Ok(jacobian_action_with(&grads, v))
    }
}

/// JF(p)(v) from precomputed gradients at v's base point.
pub fn jacobian_action_with(grads: &[TangentVector], v: &TangentVector) -> DVector<f64> {
    DVector::from_iterator(grads.len(), grads.iter().map(|g| g.inner_unchecked(v)))
}

/// x ⪯ y: y − x ∈ ℝⁿ₊.
pub fn leq(x: &DVector<f64>, y: &DVector<f64>) -> Result<bool> {
    same_len(x, y)?;
    Ok(x.iter().zip(y.iter()).all(|(a, b)| a <= b))
}

/// x ≺ y: y − x ∈ ℝⁿ₊₊.
pub fn lt(x: &DVector<f64>, y: &DVector<f64>) -> Result<bool> {
    same_len(x, y)?;
    Ok(x.iter().zip(y.iter()).all(|(a, b)| a < b))
}

/// x ⪯ y + slack·1.
pub fn leq_with_slack(x: &DVector<f64>, y: &DVector<f64>, slack: f64) -> Result<bool> {
    same_len(x, y)?;
    Ok(x.iter().zip(y.iter()).all(|(a, b)| *a <= b + slack))
}

fn same_len(x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
    if x.len() == y.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch(x.len(), y.len()))
    }
}

/// True iff ‖v(p)‖ ≤ tol, i.e. the exact steepest descent direction vanishes.
pub fn is_pareto_critical(f: &VectorObjective, p: &ManifoldPoint, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("criticality tolerance must be positive".into()));
    }
    let grads = f.gradients(p)?;
    let d = direction::solve_exact(p, &grads, tol.min(direction::DEFAULT_TOL))?;
    Ok(d.v.norm() <= tol)
}
