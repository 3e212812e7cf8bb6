//! Hyperboloid model of constant curvature κ < 0. Coordinate 0 is time-like.

use nalgebra::DVector;

pub(super) fn minkowski(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    -x[0] * y[0] + x.rows(1, x.len() - 1).dot(&y.rows(1, y.len() - 1))
}

pub(super) fn point_violation(x: &DVector<f64>, kappa: f64) -> f64 {
    if x[0] <= 0.0 {
        return f64::INFINITY;
    }
    (kappa * minkowski(x, x) - 1.0).abs()
}

pub(super) fn project_point(mut x: DVector<f64>, kappa: f64) -> DVector<f64> {
    let spatial = x.rows(1, x.len() - 1).norm_squared();
    x[0] = (-1.0 / kappa + spatial).sqrt();
    x
}

pub(super) fn tangent_violation(p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    minkowski(p, v).abs() / (p.norm() * v.norm()).max(1.0)
}

pub(super) fn project_tangent(p: &DVector<f64>, v: DVector<f64>, kappa: f64) -> DVector<f64> {
    let c = kappa * minkowski(p, &v);
    v - p * c
}

pub(super) fn exp(p: &DVector<f64>, v: &DVector<f64>, kappa: f64) -> DVector<f64> {
    let c = (-kappa).sqrt();
    let n = minkowski(v, v).max(0.0).sqrt();
    if n == 0.0 {
        return p.clone();
    }
    let s = c * n;
    p * s.cosh() + v * (s.sinh() / s)
}

pub(super) fn dist(p: &DVector<f64>, q: &DVector<f64>, kappa: f64) -> f64 {
    let c = (-kappa).sqrt();
    // chordal Minkowski length, exact for nearby points unlike arccosh(κ⟨p,q⟩)
    let w = p - q;
    let chord = minkowski(&w, &w).max(0.0).sqrt();
    2.0 / c * (0.5 * c * chord).asinh()
}

pub(super) fn log(p: &DVector<f64>, q: &DVector<f64>, kappa: f64) -> DVector<f64> {
    let c = (-kappa).sqrt();
    let d = dist(p, q, kappa);
    if d == 0.0 {
        return DVector::zeros(p.len());
    }
    let s = c * d;
    let half = (0.5 * s).sinh();
    // q - cosh(s) p
    let u = (q - p) - p * (2.0 * half * half);
    u * (s / s.sinh())
}

pub(super) fn transport(p: &DVector<f64>, q: &DVector<f64>, v: &DVector<f64>, kappa: f64) -> DVector<f64> {
    let denom = 1.0 + kappa * minkowski(p, q);
    let c = kappa * minkowski(q, v) / denom;
    v - (p + q) * c
}
