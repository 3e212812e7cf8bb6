//! Unit sphere embedded in ℝ^{m+1}.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Points closer than this to antipodal have no unique minimal geodesic.
const ANTIPODAL_MARGIN: f64 = 1e-7;

pub(super) fn point_violation(x: &DVector<f64>) -> f64 {
    (x.norm() - 1.0).abs()
}

pub(super) fn project_point(x: DVector<f64>) -> DVector<f64> {
    let n = x.norm();
    x / n
}

pub(super) fn tangent_violation(p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    p.dot(v).abs() / v.norm().max(1.0)
}

pub(super) fn project_tangent(p: &DVector<f64>, v: DVector<f64>) -> DVector<f64> {
    let c = p.dot(&v);
    v - p * c
}

pub(super) fn exp(p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    if n == 0.0 {
        return p.clone();
    }
    p * n.cos() + v * (n.sin() / n)
}

pub(super) fn dist(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    // atan2 form stays accurate for both nearby and nearly antipodal pairs.
    2.0 * (p - q).norm().atan2((p + q).norm())
}

pub(super) fn log(p: &DVector<f64>, q: &DVector<f64>) -> Result<DVector<f64>> {
    let theta = dist(p, q);
    if theta > std::f64::consts::PI - ANTIPODAL_MARGIN {
        return Err(Error::OutOfRange(
            "sphere points are (nearly) antipodal; minimal geodesic is not unique".into(),
        ));
    }
    if theta == 0.0 {
        return Ok(DVector::zeros(p.len()));
    }
    // q - cos(θ) p, written to avoid cancellation for small θ
    let half = (0.5 * theta).sin();
    let u = (q - p) + p * (2.0 * half * half);
    Ok(u * (theta / theta.sin()))
}

pub(super) fn transport(p: &DVector<f64>, q: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let denom = 1.0 + p.dot(q);
    if denom < 1e-12 {
        return Err(Error::OutOfRange(
            "parallel transport between antipodal sphere points is not unique".into(),
        ));
    }
    let c = q.dot(v) / denom;
    Ok(v - (p + q) * c)
}
