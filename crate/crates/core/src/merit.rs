//! Finite-reference under-approximation of the merit function
//! φ(p) = sup_q min_i (fᵢ(p) − fᵢ(q)).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::ManifoldPoint;
use crate::objective::VectorObjective;

/// Absolute term added to every oracle slack.
pub const SLACK_FLOOR: f64 = 1e-8;

/// φ̂(p) = max over a finite reference set of min_i (fᵢ(p) − fᵢ(q)).
///
/// Since the reference set is a subset of M, φ̂ ≤ φ. When the set samples the
/// weak Pareto set with spacing `resolution` and the components are
/// `lipschitz`-Lipschitz there, φ − φ̂ ≤ resolution · lipschitz.
#[derive(Clone, Debug)]
pub struct MeritOracle {
    reference: Vec<ManifoldPoint>,
    values: Vec<DVector<f64>>,
    resolution: f64,
    lipschitz: f64,
    exact: bool,
}

impl MeritOracle {
    pub fn new(
        objective: &VectorObjective,
        reference: Vec<ManifoldPoint>,
        resolution: f64,
        lipschitz: f64,
    ) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::InvalidArgument("empty reference set".into()));
        }
        if !(resolution >= 0.0 && lipschitz >= 0.0) {
            return Err(Error::InvalidArgument("resolution and Lipschitz bound must be non-negative".into()));
        }
        let values = reference
            .iter()
            .map(|q| objective.evaluate(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { reference, values, resolution, lipschitz, exact: false })
    }

    /// Marks the supremum as attained on the reference set, so φ̂ = φ.
    pub fn exact(mut self) -> Self {
        self.exact = true;
        self.resolution = 0.0;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn reference(&self) -> &[ManifoldPoint] {
        &self.reference
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Bound on φ − φ̂ used by every inequality check.
    pub fn slack(&self) -> f64 {
        self.resolution * self.lipschitz + SLACK_FLOOR
    }

    /// φ̂ from precomputed F(p). Negative values mean the reference set does
    /// not cover the points p dominates.
    pub fn phi_from_values(&self, fp: &DVector<f64>) -> f64 {
        self.values
            .iter()
            .map(|fq| {
                fp.iter()
                    .zip(fq.iter())
                    .map(|(a, b)| a - b)
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn phi(&self, objective: &VectorObjective, p: &ManifoldPoint) -> Result<f64> {
        Ok(self.phi_from_values(&objective.evaluate(p)?))
    }
}

/// Points spaced at most `resolution` apart along the geodesic from `a` to `b`.
pub fn geodesic_grid(a: &ManifoldPoint, b: &ManifoldPoint, resolution: f64) -> Result<Vec<ManifoldPoint>> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    let v = a.log(b)?;
    let len = v.norm();
    let steps = ((len / resolution).ceil() as usize).max(1);
    (0..=steps)
        .map(|i| a.exp(&v, i as f64 / steps as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Manifold;
    use crate::objective::FnComponent;
    use approx::assert_abs_diff_eq;

    fn line(x: f64) -> ManifoldPoint {
        ManifoldPoint::from_slice(Manifold::Euclidean { dim: 1 }, &[x]).unwrap()
    }

    /// F(x) = (x², (x−1)²) on ℝ.
    fn pair() -> VectorObjective {
        VectorObjective::new("pair", Manifold::Euclidean { dim: 1 })
            .with(FnComponent::new(|x| x[0] * x[0], |x| x * 2.0))
            .with(FnComponent::new(
                |x| (x[0] - 1.0).powi(2),
                |x| DVector::from_element(1, 2.0 * (x[0] - 1.0)),
            ))
    }

    fn grid(lo: f64, hi: f64, h: f64) -> Vec<ManifoldPoint> {
        let n = ((hi - lo) / h).round() as usize;
        (0..=n).map(|i| line(lo + i as f64 * h)).collect()
    }

    #[test]
    fn pareto_point_has_zero_merit() {
        let f = pair();
        let oracle = MeritOracle::new(&f, grid(-2.0, 3.0, 1e-3), 1e-3, 6.0).unwrap();
        assert_abs_diff_eq!(oracle.phi(&f, &line(0.0)).unwrap(), 0.0, epsilon = 1e-3);
    }

    #[test]
    fn dominated_point_matches_refined_grid() {
        // sup_q min(4 − q², 1 − (q−1)²) is attained where 4 − q² = 1 − (q−1)²,
        // i.e. q = 1 with value 1; the 1e-6 grid must agree with the 1e-3 one.
        let f = pair();
        let coarse = MeritOracle::new(&f, grid(-2.0, 3.0, 1e-3), 1e-3, 6.0).unwrap();
        let fine = MeritOracle::new(&f, grid(0.99, 1.01, 1e-6), 1e-6, 6.0).unwrap();
        let a = coarse.phi(&f, &line(2.0)).unwrap();
        let b = fine.phi(&f, &line(2.0)).unwrap();
        assert!(a <= b + 1e-15);
        assert_abs_diff_eq!(a, b, epsilon = coarse.slack());
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn members_of_the_reference_set_are_non_negative() {
        let f = pair();
        let refs = grid(-1.0, 2.0, 0.25);
        let oracle = MeritOracle::new(&f, refs.clone(), 0.25, 6.0).unwrap();
        for q in &refs {
            assert!(oracle.phi(&f, q).unwrap() >= 0.0);
        }
    }

    #[test]
    fn empty_reference_is_rejected() {
        assert!(MeritOracle::new(&pair(), vec![], 1e-3, 1.0).is_err());
    }

    #[test]
    fn geodesic_grid_spacing() {
        let m = Manifold::Sphere { dim: 2 };
        let a = m.point(DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let b = m.point(DVector::from_vec(vec![0.0, 1.0, 0.0])).unwrap();
        let g = geodesic_grid(&a, &b, 0.01).unwrap();
        assert_eq!(g.first().unwrap(), &a);
        assert!((g.last().unwrap().coords() - b.coords()).amax() < 1e-15);
        for w in g.windows(2) {
            assert!(w[0].dist(&w[1]).unwrap() <= 0.01 + 1e-12);
        }
    }
}
