mod common;

use approx::assert_abs_diff_eq;
use common::{all_manifolds, base_point, geodesic_rk4, rng};
use nalgebra::DVector;
use proptest::prelude::*;
use rmod::geometry::{
    dist, exp, inner, log, parallel_transport, random_unit_tangent, sample_in_ball, Manifold,
};

#[test]
fn closed_form_exp_matches_geodesic_ode() {
    for m in all_manifolds() {
        let mut r = rng(3);
        for _ in 0..10 {
            let p = sample_in_ball(&base_point(m), 0.8, &mut r).unwrap();
            let v = random_unit_tangent(&p, &mut r).unwrap().scaled(0.9);
            let closed = exp(&p, &v, 1.0).unwrap();
            let ode = geodesic_rk4(m, p.coords(), v.coords(), 1.0, 400);
            let err = (closed.coords() - ode).amax();
            assert!(err < 1e-6, "{m:?}: ODE mismatch {err:e}");
        }
    }
}

#[test]
fn sphere_quarter_turn_matches_ode() {
    let m = Manifold::Sphere { dim: 2 };
    let p = m.point(DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    let v = p.tangent(DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
    let q = exp(&p, &v, std::f64::consts::FRAC_PI_2).unwrap();
    let ode = geodesic_rk4(m, p.coords(), v.coords(), std::f64::consts::FRAC_PI_2, 1000);
    assert!((q.coords() - DVector::from_vec(vec![1.0, 0.0, 0.0])).amax() < 1e-15);
    assert!((q.coords() - ode).amax() < 1e-10);
}

#[test]
fn hyperboloid_distance_is_arccosh_of_minkowski_product() {
    let m = Manifold::Hyperboloid { dim: 2, curvature: -1.0 };
    let mut r = rng(5);
    for _ in 0..50 {
        let p = sample_in_ball(&base_point(m), 2.0, &mut r).unwrap();
        let q = sample_in_ball(&base_point(m), 2.0, &mut r).unwrap();
        let (x, y) = (p.coords(), q.coords());
        let mink = -x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let expected = (-mink).max(1.0).acosh();
        assert_abs_diff_eq!(dist(&p, &q).unwrap(), expected, epsilon = 1e-9);
        // and the closed-form exp, cosh(t‖v‖)p + sinh(t‖v‖)v/‖v‖
        let v = log(&p, &q).unwrap();
        let n = v.norm();
        let manual = x * n.cosh() + v.coords() * (n.sinh() / n);
        assert!((exp(&p, &v, 1.0).unwrap().coords() - manual).amax() < 1e-9);
    }
}

#[test]
fn spd_transport_preserves_inner_products() {
    let m = Manifold::Spd { size: 3 };
    let mut r = rng(8);
    for _ in 0..20 {
        let p = sample_in_ball(&base_point(m), 1.5, &mut r).unwrap();
        let q = sample_in_ball(&base_point(m), 1.5, &mut r).unwrap();
        let u = random_unit_tangent(&p, &mut r).unwrap();
        let v = random_unit_tangent(&p, &mut r).unwrap().scaled(2.0);
        let pu = parallel_transport(&p, &q, &u).unwrap();
        let pv = parallel_transport(&p, &q, &v).unwrap();
        assert!((inner(&u, &v).unwrap() - inner(&pu, &pv).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn transport_follows_geodesic_velocity() {
    // transporting γ'(0) to γ(1) yields γ'(1), which points away from p
    for m in all_manifolds() {
        let mut r = rng(21);
        let p = sample_in_ball(&base_point(m), 0.5, &mut r).unwrap();
        let v = random_unit_tangent(&p, &mut r).unwrap().scaled(0.7);
        let q = exp(&p, &v, 1.0).unwrap();
        let w = parallel_transport(&p, &q, &v).unwrap();
        let back = log(&q, &p).unwrap();
        assert!((w.coords() + back.coords()).amax() < 1e-9, "{m:?}");
    }
}

fn manifold_strategy() -> impl Strategy<Value = Manifold> {
    prop::sample::select(all_manifolds())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_log_round_trip(m in manifold_strategy(), seed in any::<u64>(), len in 0.01f64..1.4) {
        let mut r = rng(seed);
        let p = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let v = random_unit_tangent(&p, &mut r).unwrap().scaled(len);
        let q = exp(&p, &v, 1.0).unwrap();
        let back = log(&p, &q).unwrap();
        prop_assert!((back.coords() - v.coords()).amax() < 1e-8);
        let q2 = exp(&p, &back, 1.0).unwrap();
        prop_assert!((q2.coords() - q.coords()).amax() < 1e-8);
    }

    #[test]
    fn geodesic_speed(m in manifold_strategy(), seed in any::<u64>(), t in 0.0f64..1.5) {
        let mut r = rng(seed);
        let p = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let v = random_unit_tangent(&p, &mut r).unwrap();
        prop_assume!(t * v.norm() < m.convexity_radius());
        let q = exp(&p, &v, t).unwrap();
        prop_assert!((dist(&q, &p).unwrap() - t * v.norm()).abs() < 1e-8);
    }

    #[test]
    fn transport_is_isometry(m in manifold_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let q = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let u = random_unit_tangent(&p, &mut r).unwrap();
        let v = random_unit_tangent(&p, &mut r).unwrap().scaled(1.7);
        let pu = parallel_transport(&p, &q, &u).unwrap();
        let pv = parallel_transport(&p, &q, &v).unwrap();
        prop_assert!((inner(&u, &v).unwrap() - inner(&pu, &pv).unwrap()).abs() < 1e-10);
        prop_assert!((v.norm() - pv.norm()).abs() < 1e-10);
    }

    #[test]
    fn distance_is_a_metric(m in manifold_strategy(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let b = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let c = sample_in_ball(&base_point(m), 1.0, &mut r).unwrap();
        let ab = dist(&a, &b).unwrap();
        prop_assert!((ab - dist(&b, &a).unwrap()).abs() < 1e-10);
        prop_assert!(ab <= dist(&a, &c).unwrap() + dist(&c, &b).unwrap() + 1e-10);
        prop_assert_eq!(dist(&a, &a).unwrap(), 0.0);
    }
}
