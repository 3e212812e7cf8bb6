use nalgebra::DVector;

pub(super) fn exp(p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    p + v
}

pub(super) fn log(p: &DVector<f64>, q: &DVector<f64>) -> DVector<f64> {
    q - p
}

pub(super) fn dist(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    (q - p).norm()
}
