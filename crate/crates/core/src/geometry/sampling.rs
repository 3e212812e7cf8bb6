//! Random points and directions that respect the manifold geometry.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{spd, Manifold, ManifoldPoint, TangentVector};
use crate::error::{Error, Result};

/// Unit-norm tangent vector at `p`, isotropic with respect to the metric.
pub fn random_unit_tangent<R: Rng + ?Sized>(p: &ManifoldPoint, rng: &mut R) -> Result<TangentVector> {
    let m = p.manifold();
    loop {
        let g = DVector::from_fn(m.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let raw = match m {
            Manifold::Spd { size } => spd::whiten_tangent(p.coords(), &g, size),
            _ => g,
        };
        let v = TangentVector::projected(p.clone(), raw)?;
        let n = v.norm();
        if n > 1e-8 {
            return Ok(v.scaled(1.0 / n));
        }
    }
}

/// Uniform-in-radius sample from the geodesic ball B(center, radius):
/// a random direction is pushed through the exponential map.
pub fn sample_in_ball<R: Rng + ?Sized>(
    center: &ManifoldPoint,
    radius: f64,
    rng: &mut R,
) -> Result<ManifoldPoint> {
    sample_in_annulus(center, 0.0, radius, rng)
}

/// Sample with geodesic distance to `center` in [inner, outer].
pub fn sample_in_annulus<R: Rng + ?Sized>(
    center: &ManifoldPoint,
    inner: f64,
    outer: f64,
    rng: &mut R,
) -> Result<ManifoldPoint> {
    if !(inner >= 0.0 && outer >= inner && outer.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bad sampling radii [{inner}, {outer}]"
        )));
    }
    let dim = center.manifold().intrinsic_dim() as f64;
    let u: f64 = rng.gen();
    let lo = inner.powf(dim);
    let hi = outer.powf(dim);
    let r = (lo + u * (hi - lo)).powf(1.0 / dim);
    let dir = random_unit_tangent(center, rng)?;
    center.exp(&dir, r)
}
