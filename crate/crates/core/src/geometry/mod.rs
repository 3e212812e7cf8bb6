//! Exact geometry kernels for the four supported manifolds.
//!
//! Every manifold is represented in ambient coordinates:
//!
//! | model        | ambient space          | point constraint              | tangent constraint          |
//! |--------------|------------------------|-------------------------------|-----------------------------|
//! | Euclidean(m) | ℝ^m                    | none                          | none                        |
//! | Sphere(m)    | ℝ^{m+1}                | ‖p‖ = 1                       | ⟨p, v⟩ = 0                  |
//! | Hyperboloid  | Minkowski ℝ^{m+1}      | ⟨p, p⟩_L = 1/κ, p₀ > 0        | ⟨p, v⟩_L = 0                |
//! | SPD(d)       | d×d matrices, row-major| symmetric, positive definite  | symmetric                   |
//!
//! Exponential map, logarithm, distance and parallel transport are closed
//! forms in all four cases. Points and tangent vectors are validated on
//! construction: drift up to [`REPROJECT_LIMIT`] is silently projected back
//! onto the model, anything larger is an error.

mod euclidean;
mod hyperboloid;
mod sampling;
mod spd;
mod sphere;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sampling::{random_unit_tangent, sample_in_annulus, sample_in_ball};

/// Violations at or below this are accepted as-is.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Violations in `(CONSTRAINT_TOL, REPROJECT_LIMIT]` are projected back onto the model.
pub const REPROJECT_LIMIT: f64 = 1e-6;

/// Manifold descriptor. Serialized as e.g. `{"kind":"sphere","dim":2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Manifold {
    Euclidean {
        dim: usize,
    },
    /// Unit sphere S^dim ⊂ ℝ^{dim+1}.
    Sphere {
        dim: usize,
    },
    /// Hyperboloid sheet of constant curvature `curvature < 0`.
    Hyperboloid {
        dim: usize,
        #[serde(default = "default_curvature")]
        curvature: f64,
    },
    /// Symmetric positive-definite `size`×`size` matrices, affine-invariant metric.
    Spd {
        size: usize,
    },
}

fn default_curvature() -> f64 {
    -1.0
}

impl Manifold {
    /// Checks the descriptor parameters themselves.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Manifold::Euclidean { dim } | Manifold::Sphere { dim } => dim > 0,
            Manifold::Hyperboloid { dim, curvature } => {
                dim > 0 && curvature.is_finite() && curvature < 0.0
            }
            Manifold::Spd { size } => size > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid manifold descriptor {self:?}")))
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { dim } => dim,
            Manifold::Sphere { dim } | Manifold::Hyperboloid { dim, .. } => dim + 1,
            Manifold::Spd { size } => size * size,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { dim }
            | Manifold::Sphere { dim }
            | Manifold::Hyperboloid { dim, .. } => dim,
            Manifold::Spd { size } => size * (size + 1) / 2,
        }
    }

    /// Analytic (lower, upper) bounds on sectional curvature.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        match *self {
            Manifold::Euclidean { .. } => (0.0, 0.0),
            Manifold::Sphere { .. } => (1.0, 1.0),
            Manifold::Hyperboloid { curvature, .. } => (curvature, curvature),
            Manifold::Spd { .. } => (-0.5, 0.0),
        }
    }

    pub fn curvature_lower_bound(&self) -> f64 {
        self.curvature_bounds().0
    }

    pub fn curvature_upper_bound(&self) -> f64 {
        self.curvature_bounds().1
    }

    /// Radius below which balls are strongly convex.
    pub fn convexity_radius(&self) -> f64 {
        match self {
            Manifold::Sphere { .. } => std::f64::consts::FRAC_PI_2,
            _ => f64::INFINITY,
        }
    }

    /// Builds a point, re-projecting small drift.
    pub fn point(&self, coords: impl Into<DVector<f64>>) -> Result<ManifoldPoint> {
        ManifoldPoint::new(*self, coords.into())
    }

    fn point_violation(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => sphere::point_violation(x),
            Manifold::Hyperboloid { curvature, .. } => hyperboloid::point_violation(x, *curvature),
            Manifold::Spd { size } => spd::point_violation(x, *size)?,
        })
    }

    fn project_point(&self, x: DVector<f64>) -> DVector<f64> {
        match self {
            Manifold::Euclidean { .. } => x,
            Manifold::Sphere { .. } => sphere::project_point(x),
            Manifold::Hyperboloid { curvature, .. } => hyperboloid::project_point(x, *curvature),
            Manifold::Spd { size } => spd::symmetrize(&x, *size),
        }
    }

    fn tangent_violation(&self, p: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => sphere::tangent_violation(p, v),
            Manifold::Hyperboloid { .. } => hyperboloid::tangent_violation(p, v),
            Manifold::Spd { size } => spd::asymmetry(v, *size),
        }
    }

    fn project_tangent(&self, p: &DVector<f64>, v: DVector<f64>) -> DVector<f64> {
        match self {
            Manifold::Euclidean { .. } => v,
            Manifold::Sphere { .. } => sphere::project_tangent(p, v),
            Manifold::Hyperboloid { curvature, .. } => {
                hyperboloid::project_tangent(p, v, *curvature)
            }
            Manifold::Spd { size } => spd::symmetrize(&v, *size),
        }
    }

    fn inner_raw(&self, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self {
            Manifold::Euclidean { .. } | Manifold::Sphere { .. } => u.dot(v),
            Manifold::Hyperboloid { .. } => hyperboloid::minkowski(u, v),
            Manifold::Spd { size } => spd::inner(p, u, v, *size),
        }
    }

    /// exp_p(v), with any step length already folded into `v`.
    fn exp_raw(&self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Manifold::Euclidean { .. } => euclidean::exp(p, v),
            Manifold::Sphere { .. } => sphere::exp(p, v),
            Manifold::Hyperboloid { curvature, .. } => hyperboloid::exp(p, v, *curvature),
            Manifold::Spd { size } => spd::exp(p, v, *size),
        }
    }

    fn dist_raw(&self, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
        if p == q {
            return 0.0;
        }
        match self {
            Manifold::Euclidean { .. } => euclidean::dist(p, q),
            Manifold::Sphere { .. } => sphere::dist(p, q),
            Manifold::Hyperboloid { curvature, .. } => hyperboloid::dist(p, q, *curvature),
            Manifold::Spd { size } => spd::dist(p, q, *size),
        }
    }

    fn log_raw(&self, p: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
        if p == q {
            return Ok(DVector::zeros(p.len()));
        }
        match self {
            Manifold::Euclidean { .. } => Ok(euclidean::log(p, q)),
            Manifold::Sphere { .. } => sphere::log(p, q),
            Manifold::Hyperboloid { curvature, .. } => Ok(hyperboloid::log(p, q, *curvature)),
            Manifold::Spd { size } => Ok(spd::log(p, q, *size)),
        }
    }

    fn transport_raw(
        &self,
        p: &DVector<f64>,
        q: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        if p == q {
            return Ok(v.clone());
        }
        match self {
            Manifold::Euclidean { .. } => Ok(v.clone()),
            Manifold::Sphere { .. } => sphere::transport(p, q, v),
            Manifold::Hyperboloid { curvature, .. } => {
                Ok(hyperboloid::transport(p, q, v, *curvature))
            }
            Manifold::Spd { size } => Ok(spd::transport(p, q, v, *size)),
        }
    }
}

/// A point on a manifold, in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    coords: DVector<f64>,
}

impl ManifoldPoint {
    pub fn new(manifold: Manifold, coords: DVector<f64>) -> Result<Self> {
        manifold.validate()?;
        if coords.len() != manifold.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: manifold.ambient_dim(),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        let violation = manifold.point_violation(&coords)?;
        let coords = if violation <= CONSTRAINT_TOL {
            coords
        } else if violation <= REPROJECT_LIMIT {
            manifold.project_point(coords)
        } else {
            return Err(Error::ConstraintViolation { what: "point", violation });
        };
        Ok(Self { manifold, coords })
    }

    pub fn from_slice(manifold: Manifold, coords: &[f64]) -> Result<Self> {
        Self::new(manifold, DVector::from_column_slice(coords))
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Builds a tangent vector at this point.
    pub fn tangent(&self, coords: impl Into<DVector<f64>>) -> Result<TangentVector> {
        TangentVector::new(self.clone(), coords.into())
    }

    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector {
            base: self.clone(),
            coords: DVector::zeros(self.coords.len()),
        }
    }

    fn same_manifold(&self, other: &ManifoldPoint) -> Result<()> {
        if self.manifold == other.manifold {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch(format!(
                "{:?} vs {:?}",
                self.manifold, other.manifold
            )))
        }
    }

    /// γ(t) for the geodesic with γ(0) = self, γ'(0) = v.
    pub fn exp(&self, v: &TangentVector, t: f64) -> Result<ManifoldPoint> {
        if v.base != *self {
            return Err(Error::BaseMismatch);
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("geodesic time"));
        }
        let step = &v.coords * t;
        ManifoldPoint::new(self.manifold, self.manifold.exp_raw(&self.coords, &step))
    }

    pub fn dist(&self, other: &ManifoldPoint) -> Result<f64> {
        self.same_manifold(other)?;
        Ok(self.manifold.dist_raw(&self.coords, &other.coords))
    }

    /// Initial velocity of the minimal geodesic reaching `other` at time 1.
    pub fn log(&self, other: &ManifoldPoint) -> Result<TangentVector> {
        self.same_manifold(other)?;
        let raw = self.manifold.log_raw(&self.coords, &other.coords)?;
        let coords = self.manifold.project_tangent(&self.coords, raw);
        Ok(TangentVector { base: self.clone(), coords })
    }

    /// Parallel transport of `v` (based here) along the minimal geodesic to `other`.
    pub fn transport(&self, other: &ManifoldPoint, v: &TangentVector) -> Result<TangentVector> {
        self.same_manifold(other)?;
        if v.base != *self {
            return Err(Error::BaseMismatch);
        }
        let raw = self.manifold.transport_raw(&self.coords, &other.coords, &v.coords)?;
        TangentVector::new(other.clone(), raw)
    }
}

/// A tangent vector bound to its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    coords: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: ManifoldPoint, coords: DVector<f64>) -> Result<Self> {
        let m = base.manifold;
        if coords.len() != m.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ambient_dim(),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("tangent coordinates"));
        }
        let violation = m.tangent_violation(&base.coords, &coords);
        let coords = if violation <= CONSTRAINT_TOL {
            coords
        } else if violation <= REPROJECT_LIMIT {
            m.project_tangent(&base.coords, coords)
        } else {
            return Err(Error::ConstraintViolation { what: "tangent vector", violation });
        };
        Ok(Self { base, coords })
    }

    /// Projects arbitrary ambient coordinates onto the tangent space at `base`.
    pub fn projected(base: ManifoldPoint, coords: DVector<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("tangent coordinates"));
        }
        if coords.len() != base.manifold.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: base.manifold.ambient_dim(),
                got: coords.len(),
            });
        }
        let coords = base.manifold.project_tangent(&base.coords, coords);
        Ok(Self { base, coords })
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(self.inner_unchecked(other))
    }

    /// Metric inner product; callers guarantee a common base.
    pub(crate) fn inner_unchecked(&self, other: &TangentVector) -> f64 {
        self.base
            .manifold
            .inner_raw(&self.base.coords, &self.coords, &other.coords)
    }

    pub fn norm_squared(&self) -> f64 {
        self.inner_unchecked(self).max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, a: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            coords: &self.coords * a,
        }
    }

    /// Σ wᵢ vᵢ over vectors sharing one base point.
    pub fn combination(vectors: &[TangentVector], weights: &[f64]) -> Result<TangentVector> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty combination".into()))?;
        if vectors.len() != weights.len() {
            return Err(Error::LengthMismatch(vectors.len(), weights.len()));
        }
        let mut coords = DVector::zeros(first.coords.len());
        for (v, &w) in vectors.iter().zip(weights) {
            if v.base != first.base {
                return Err(Error::BaseMismatch);
            }
            coords.axpy(w, &v.coords, 1.0);
        }
        Ok(TangentVector { base: first.base.clone(), coords })
    }
}

/// Metric inner product of two tangent vectors at the same point.
pub fn inner(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    u.inner(v)
}

/// Geodesic from `p` with initial velocity `v`, evaluated at time `t`.
pub fn exp(p: &ManifoldPoint, v: &TangentVector, t: f64) -> Result<ManifoldPoint> {
    p.exp(v, t)
}

pub fn dist(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<f64> {
    p.dist(q)
}

pub fn log(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<TangentVector> {
    p.log(q)
}

pub fn parallel_transport(
    p: &ManifoldPoint,
    q: &ManifoldPoint,
    v: &TangentVector,
) -> Result<TangentVector> {
    p.transport(q, v)
}

/// Row-major d×d matrix as a flat coordinate vector.
pub fn spd_coords(m: &nalgebra::DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn euclidean_orthogonal_inner_is_zero() {
        let m = Manifold::Euclidean { dim: 2 };
        let p = m.point(DVector::from_vec(vec![0.3, -1.0])).unwrap();
        let u = p.tangent(DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let v = p.tangent(DVector::from_vec(vec![0.0, 1.0])).unwrap();
        assert_eq!(inner(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn sphere_induced_metric() {
        let m = Manifold::Sphere { dim: 2 };
        let p = m.point(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        let u = p.tangent(DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert_eq!(inner(&u, &u).unwrap(), 1.0);
    }

    #[test]
    fn spd_inner_at_identity_is_trace() {
        let m = Manifold::Spd { size: 2 };
        let p = m.point(DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0])).unwrap();
        let u = p.tangent(DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(inner(&u, &u).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_rejects_base_mismatch() {
        let m = Manifold::Euclidean { dim: 2 };
        let p = m.point(DVector::from_vec(vec![0.0, 0.0])).unwrap();
        let q = m.point(DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let u = p.tangent(DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let v = q.tangent(DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!(matches!(inner(&u, &v), Err(Error::BaseMismatch)));
    }

    #[test]
    fn euclidean_exp_is_translation() {
        let m = Manifold::Euclidean { dim: 3 };
        let p = m.point(DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
        let v = p.tangent(DVector::from_vec(vec![0.5, -1.0, 2.0])).unwrap();
        let q = exp(&p, &v, 2.0).unwrap();
        assert_eq!(q.coords().as_slice(), &[2.0, 0.0, 7.0]);
        assert_eq!(log(&p, &q).unwrap().coords(), &(q.coords() - p.coords()));
        assert_abs_diff_eq!(dist(&p, &q).unwrap(), (0.25f64 + 1.0 + 4.0).sqrt() * 2.0, epsilon = 1e-14);
    }

    #[test]
    fn sphere_quarter_turn() {
        let m = Manifold::Sphere { dim: 2 };
        let p = m.point(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        let v = p.tangent(DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let q = exp(&p, &v, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(q.coords()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.coords()[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dist(&p, &q).unwrap(), FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn log_of_self_is_zero() {
        for m in [
            Manifold::Sphere { dim: 2 },
            Manifold::Hyperboloid { dim: 2, curvature: -1.0 },
        ] {
            let p = sample_in_ball(&base_point(m), 0.5, &mut rng()).unwrap();
            assert_eq!(log(&p, &p).unwrap().norm(), 0.0);
            assert_eq!(dist(&p, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn transport_to_self_is_identity() {
        for m in all_manifolds() {
            let mut r = rng();
            let p = sample_in_ball(&base_point(m), 0.7, &mut r).unwrap();
            let v = random_unit_tangent(&p, &mut r).unwrap();
            let w = parallel_transport(&p, &p, &v).unwrap();
            assert!((w.coords() - v.coords()).amax() < 1e-14);
        }
    }

    #[test]
    fn antipodal_sphere_points_are_out_of_range() {
        let m = Manifold::Sphere { dim: 2 };
        let p = m.point(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
        let q = m.point(DVector::from_vec(vec![0.0, 0.0, -1.0])).unwrap();
        assert!(matches!(log(&p, &q), Err(Error::OutOfRange(_))));
        let v = p.tangent(DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert!(matches!(parallel_transport(&p, &q, &v), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn small_drift_is_reprojected_large_is_rejected() {
        let m = Manifold::Sphere { dim: 2 };
        let p = m.point(DVector::from_vec(vec![0.0, 0.0, 1.0 + 1e-8])).unwrap();
        assert_abs_diff_eq!(p.coords().norm(), 1.0, epsilon = 1e-15);
        let err = m.point(DVector::from_vec(vec![0.0, 0.0, 1.1])).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { .. }));

        let v = p.tangent(DVector::from_vec(vec![1.0, 0.0, 1e-8])).unwrap();
        assert_eq!(v.coords()[2], 0.0);
        assert!(p.tangent(DVector::from_vec(vec![1.0, 0.0, 0.5])).is_err());
    }

    #[test]
    fn spd_rejects_indefinite_matrix() {
        let m = Manifold::Spd { size: 2 };
        assert!(m.point(DVector::from_vec(vec![1.0, 2.0, 2.0, 1.0])).is_err());
        let asym = m.point(DVector::from_vec(vec![1.0, 0.5, 0.2, 1.0]));
        assert!(matches!(asym, Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn non_finite_inputs_are_contract_violations() {
        let m = Manifold::Euclidean { dim: 1 };
        assert!(matches!(m.point(DVector::from_vec(vec![f64::NAN])), Err(Error::NonFinite(_))));
        let p = m.point(DVector::from_vec(vec![0.0])).unwrap();
        let v = p.tangent(DVector::from_vec(vec![1.0])).unwrap();
        assert!(matches!(exp(&p, &v, f64::INFINITY), Err(Error::NonFinite(_))));
    }

    #[test]
    fn manifold_mismatch_in_dist() {
        let a = Manifold::Euclidean { dim: 3 }.point(DVector::zeros(3)).unwrap();
        let b = Manifold::Sphere { dim: 2 }
            .point(DVector::from_vec(vec![1.0, 0.0, 0.0]))
            .unwrap();
        assert!(matches!(dist(&a, &b), Err(Error::ManifoldMismatch(_))));
    }

    #[test]
    fn descriptor_constants() {
        assert_eq!(Manifold::Sphere { dim: 2 }.convexity_radius(), FRAC_PI_2);
        assert_eq!(Manifold::Spd { size: 3 }.convexity_radius(), f64::INFINITY);
        assert_eq!(Manifold::Spd { size: 3 }.curvature_lower_bound(), -0.5);
        assert_eq!(
            Manifold::Hyperboloid { dim: 2, curvature: -2.0 }.curvature_bounds(),
            (-2.0, -2.0)
        );
        assert!(Manifold::Hyperboloid { dim: 2, curvature: 0.5 }.validate().is_err());
    }

    #[test]
    fn descriptor_json_shape() {
        let m: Manifold = serde_json::from_str(r#"{"kind":"sphere","dim":3}"#).unwrap();
        assert_eq!(m, Manifold::Sphere { dim: 3 });
        let h: Manifold = serde_json::from_str(r#"{"kind":"hyperboloid","dim":2}"#).unwrap();
        assert_eq!(h, Manifold::Hyperboloid { dim: 2, curvature: -1.0 });
        let s = serde_json::to_string(&Manifold::Spd { size: 2 }).unwrap();
        assert_eq!(s, r#"{"kind":"spd","size":2}"#);
    }

    pub(crate) fn rng() -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(11)
    }

    pub(crate) fn all_manifolds() -> [Manifold; 4] {
        [
            Manifold::Euclidean { dim: 3 },
            Manifold::Sphere { dim: 2 },
            Manifold::Hyperboloid { dim: 2, curvature: -1.0 },
            Manifold::Spd { size: 2 },
        ]
    }

    pub(crate) fn base_point(m: Manifold) -> ManifoldPoint {
        let mut c = DVector::zeros(m.ambient_dim());
        match m {
            Manifold::Euclidean { .. } => {}
            Manifold::Sphere { dim } => c[dim] = 1.0,
            Manifold::Hyperboloid { curvature, .. } => c[0] = (-1.0 / curvature).sqrt(),
            Manifold::Spd { size } => {
                for i in 0..size {
                    c[i * size + i] = 1.0;
                }
            }
        }
        m.point(c).unwrap()
    }
}
