//! Symmetric positive-definite matrices with the affine-invariant metric
//! ⟨U, V⟩_P = tr(P⁻¹ U P⁻¹ V). Coordinates are row-major d×d entries.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

fn mat(x: &DVector<f64>, d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, x.as_slice())
}

fn flat(m: &DMatrix<f64>) -> DVector<f64> {
    super::spd_coords(m)
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// f applied to the eigenvalues of a symmetric matrix.
fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(sym(m));
    let q = &eig.eigenvectors;
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    sym(&(q * diag * q.transpose()))
}

/// (P^{1/2}, P^{-1/2})
fn sqrt_pair(p: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(sym(p));
    let q = &eig.eigenvectors;
    let s = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let si = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    (
        sym(&(q * s * q.transpose())),
        sym(&(q * si * q.transpose())),
    )
}

pub(super) fn asymmetry(x: &DVector<f64>, d: usize) -> f64 {
    let m = mat(x, d);
    (&m - m.transpose()).amax() / m.amax().max(1.0)
}

pub(super) fn symmetrize(x: &DVector<f64>, d: usize) -> DVector<f64> {
    flat(&sym(&mat(x, d)))
}

pub(super) fn point_violation(x: &DVector<f64>, d: usize) -> Result<f64> {
    let a = asymmetry(x, d);
    let min_eig = SymmetricEigen::new(sym(&mat(x, d))).eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(Error::ConstraintViolation {
            what: "SPD point (not positive definite)",
            violation: -min_eig,
        });
    }
    Ok(a)
}

pub(super) fn inner(p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>, d: usize) -> f64 {
    let pm = mat(p, d);
    let pinv = pm.try_inverse().expect("SPD point is invertible");
    let a = &pinv * mat(u, d);
    let b = &pinv * mat(v, d);
    (a * b).trace()
}

pub(super) fn exp(p: &DVector<f64>, v: &DVector<f64>, d: usize) -> DVector<f64> {
    let (s, si) = sqrt_pair(&mat(p, d));
    let inner = &si * mat(v, d) * &si;
    let e = sym_fn(&inner, f64::exp);
    flat(&sym(&(&s * e * &s)))
}

/// logm(P^{-1/2} Q P^{-1/2}) together with P^{1/2}.
fn whitened_log(p: &DVector<f64>, q: &DVector<f64>, d: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (s, si) = sqrt_pair(&mat(p, d));
    let w = &si * mat(q, d) * &si;
    (sym_fn(&w, f64::ln), s)
}

pub(super) fn log(p: &DVector<f64>, q: &DVector<f64>, d: usize) -> DVector<f64> {
    let (l, s) = whitened_log(p, q, d);
    flat(&sym(&(&s * l * &s)))
}

pub(super) fn dist(p: &DVector<f64>, q: &DVector<f64>, d: usize) -> f64 {
    let (_, si) = sqrt_pair(&mat(p, d));
    let w = sym(&(&si * mat(q, d) * &si));
    SymmetricEigen::new(w)
        .eigenvalues
        .iter()
        .map(|l| l.ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// v ↦ E v Eᵀ with E = (Q P⁻¹)^{1/2} = P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{-1/2}.
pub(super) fn transport(p: &DVector<f64>, q: &DVector<f64>, v: &DVector<f64>, d: usize) -> DVector<f64> {
    let (s, si) = sqrt_pair(&mat(p, d));
    let w = &si * mat(q, d) * &si;
    let e = &s * sym_fn(&w, f64::sqrt) * &si;
    flat(&sym(&(&e * mat(v, d) * e.transpose())))
}

/// P^{1/2} S P^{1/2}: maps a Frobenius-isotropic symmetric S to a metric-isotropic tangent.
pub(super) fn whiten_tangent(p: &DVector<f64>, s: &DVector<f64>, d: usize) -> DVector<f64> {
    let (sq, _) = sqrt_pair(&mat(p, d));
    flat(&sym(&(&sq * sym(&mat(s, d)) * &sq)))
}
