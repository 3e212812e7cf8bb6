//! Test-only oracles, independent of the closed-form kernels they check.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmod::geometry::{Manifold, ManifoldPoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn all_manifolds() -> Vec<Manifold> {
    vec![
        Manifold::Euclidean { dim: 3 },
        Manifold::Sphere { dim: 2 },
        Manifold::Hyperboloid { dim: 2, curvature: -1.0 },
        Manifold::Hyperboloid { dim: 3, curvature: -0.5 },
        Manifold::Spd { size: 2 },
        Manifold::Spd { size: 3 },
    ]
}

/// A canonical point: origin, north pole, hyperboloid apex, identity.
pub fn base_point(m: Manifold) -> ManifoldPoint {
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

fn minkowski(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    -x[0] * y[0] + x.rows(1, x.len() - 1).dot(&y.rows(1, y.len() - 1))
}

/// Second derivative of a geodesic in ambient coordinates, from the
/// geodesic equation of each model.
fn acceleration(m: Manifold, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    match m {
        Manifold::Euclidean { .. } => DVector::zeros(x.len()),
        Manifold::Sphere { .. } => -x * v.dot(v),
        Manifold::Hyperboloid { curvature, .. } => x * (-curvature * minkowski(v, v)),
        Manifold::Spd { size } => {
            let p = DMatrix::from_row_slice(size, size, x.as_slice());
            let pv = DMatrix::from_row_slice(size, size, v.as_slice());
            let a = &pv * p.try_inverse().unwrap() * &pv;
            DVector::from_iterator(a.len(), a.transpose().iter().copied())
        }
    }
}

/// Classical fourth-order Runge-Kutta integration of the geodesic ODE.
pub fn geodesic_rk4(m: Manifold, x0: &DVector<f64>, v0: &DVector<f64>, t: f64, steps: usize) -> DVector<f64> {
    let h = t / steps as f64;
    let mut x = x0.clone();
    let mut v = v0.clone();
    for _ in 0..steps {
        let k1x = v.clone();
        let k1v = acceleration(m, &x, &v);
        let x2 = &x + &k1x * (h / 2.0);
        let v2 = &v + &k1v * (h / 2.0);
        let k2x = v2.clone();
        let k2v = acceleration(m, &x2, &v2);
        let x3 = &x + &k2x * (h / 2.0);
        let v3 = &v + &k2v * (h / 2.0);
        let k3x = v3.clone();
        let k3v = acceleration(m, &x3, &v3);
        let x4 = &x + &k3x * h;
        let v4 = &v + &k3v * h;
        let k4x = v4.clone();
        let k4v = acceleration(m, &x4, &v4);
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    }
    x
}

/// Enumerates every point of the simplex grid {λ = k/m : Σk = m} in n
/// coordinates and returns min ‖Σ λᵢ gᵢ‖² under the Gram matrix. Plain
/// enumeration; only usable for small m.
pub fn grid_min_norm_sq(gram: &DMatrix<f64>, m: usize) -> f64 {
    let n = gram.nrows();
    let mut best = f64::INFINITY;
    let mut k = vec![0usize; n];
    fn rec(i: usize, left: usize, k: &mut Vec<usize>, gram: &DMatrix<f64>, m: usize, best: &mut f64) {
        let n = k.len();
        if i == n - 1 {
            k[i] = left;
            let lam: Vec<f64> = k.iter().map(|&x| x as f64 / m as f64).collect();
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += lam[a] * lam[b] * gram[(a, b)];
                }
            }
            if s < *best {
                *best = s;
            }
            return;
        }
        for x in 0..=left {
            k[i] = x;
            rec(i + 1, left - x, k, gram, m, best);
        }
    }
    rec(0, m, &mut k, gram, m, &mut best);
    best
}
