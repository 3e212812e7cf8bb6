mod common;

use common::rng;
use nalgebra::DVector;
use proptest::prelude::*;
use rmod::direction::{solve_exact, DEFAULT_TOL};
use rmod::engine::{run, run_with_merit, RunConfig, StepSizeRule};
use rmod::geometry::{sample_in_ball, Manifold, ManifoldPoint};
use rmod::harness::*;
use rmod::merit::MeritOracle;
use rmod::objective::{FnComponent, HalfSquaredDistance, VectorObjective};
use rmod::problems::{p1, p3, p3_anchors, p5, scalar_quadratic, Ball};

fn scalar_run(p0: f64) -> (rmod::engine::Trace, MeritOracle) {
    let prob = scalar_quadratic();
    let oracle = prob.oracle(1e-3).unwrap();
    let start = ManifoldPoint::from_slice(prob.manifold(), &[p0]).unwrap();
    let config = RunConfig { tol_critical: 1e-8, ..RunConfig::default() };
    let tr = run_with_merit(&prob.objective, &start, &StepSizeRule::Armijo { nu: 0.5 }, &config, Some(&oracle)).unwrap();
    (tr, oracle)
}

#[test]
fn scalar_merit_is_half_square() {
    let prob = scalar_quadratic();
    let oracle = prob.oracle(1e-3).unwrap();
    for x in [-1.5, -0.3, 0.0, 0.7, 2.0] {
        let p = ManifoldPoint::from_slice(prob.manifold(), &[x]).unwrap();
        assert!((oracle.phi(&prob.objective, &p).unwrap() - 0.5 * x * x).abs() < 1e-15);
    }
}

#[test]
fn identical_anchors_collapse_the_pareto_set() {
    let (a, _) = p3_anchors();
    let f = VectorObjective::new("twin", a.manifold())
        .with(HalfSquaredDistance::new(a.clone()))
        .with(HalfSquaredDistance::new(a.clone()));
    let oracle = MeritOracle::new(&f, vec![a.clone()], 0.0, 1.0).unwrap().exact();
    assert_eq!(oracle.phi(&f, &a).unwrap(), 0.0);
}

#[test]
fn one_step_quadratic_merit_checks() {
    let (tr, oracle) = scalar_run(1.0);
    assert_eq!(tr.iterations(), 1);
    let descent = check_phi_descent(&tr, oracle.slack());
    assert_eq!(descent.status, Status::Pass);
    // margin of (βt/2)|v|² ≤ φ(p0) − φ(p1): 0.5 − 0 − 0.25
    assert!((descent.worst_margin.unwrap() - 0.25 - oracle.slack()).abs() < 1e-12);
    let sum = check_summability(&tr, oracle.slack());
    assert_eq!(sum.status, Status::Pass);
    assert!((sum.constants["bound"] - 2.0 - 4.0 * oracle.slack()).abs() < 1e-12);
    assert!((sum.constants["sum"] - 1.0).abs() < 1e-15);
}

#[test]
fn stationary_start_passes_trivially() {
    let (tr, oracle) = scalar_run(0.0);
    assert_eq!(tr.iterations(), 0);
    for rep in [
        check_phi_descent(&tr, oracle.slack()),
        check_summability(&tr, oracle.slack()),
        check_monotone(&tr),
        check_quasi_fejer(&tr, &scalar_quadratic().objective, &[]).unwrap(),
    ] {
        assert_eq!(rep.status, Status::Pass, "{rep:?}");
    }
}

#[test]
fn scalar_rate_constants() {
    let (tr, oracle) = scalar_run(1.0);
    let rate = check_linear_rate(&tr, 2.0, oracle.slack()).unwrap();
    assert_eq!(rate.report.status, Status::Pass);
    assert!((rate.rho.unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(rate.t_low, Some(1.0));
    let bound = check_armijo_lower_bound(&tr, Some(1.0), Some(0.5));
    assert_eq!(bound.status, Status::Pass);
    assert_eq!(bound.constants["bound"], 0.125);
    assert_eq!(check_armijo_lower_bound(&tr, None, Some(0.5)).status, Status::Inconclusive);
}

#[test]
fn incompatible_rate_constants_are_inconclusive() {
    let (tr, oracle) = scalar_run(1.0);
    // αβt̲/2 = 1 makes ρ = 0
    let rate = check_linear_rate(&tr, 4.0, oracle.slack()).unwrap();
    assert_eq!(rate.report.status, Status::Inconclusive);
}

#[test]
fn kl_estimates() {
    let prob = scalar_quadratic();
    let oracle = prob.oracle(1e-3).unwrap();
    let est = estimate_kl(&prob.objective, &oracle, prob.kl_ball.as_ref().unwrap(), 500, 1).unwrap();
    assert!((est.alpha_hat.unwrap() - 2.0).abs() < 1e-9);

    let prob = p1();
    let oracle = prob.oracle(1e-3).unwrap();
    let off = Ball::new(ManifoldPoint::from_slice(prob.manifold(), &[1.0, 1.5]).unwrap(), 0.4);
    let est = estimate_kl(&prob.objective, &oracle, &off, 300, 2).unwrap();
    assert_eq!(est.used, 300);
    assert!(est.alpha_hat.unwrap() > 0.0);

    // a ball of weak Pareto points is excluded entirely
    let seg = Ball::new(ManifoldPoint::from_slice(prob.manifold(), &[1.0, 0.0]).unwrap(), 0.0);
    let est = estimate_kl(&prob.objective, &oracle, &seg, 50, 3).unwrap();
    assert_eq!(est.alpha_hat, None);
    assert_eq!(kl_report(&est).status, Status::Inconclusive);
}

#[test]
fn p5_kl_flag_holds_without_quasi_convexity() {
    let prob = p5();
    let oracle = prob.oracle(1e-3).unwrap();
    let est = estimate_kl(&prob.objective, &oracle, prob.kl_ball.as_ref().unwrap(), 1000, 4).unwrap();
    assert!(est.alpha_hat.unwrap() > 0.0);
    let wide = Ball::new(prob.kl_ball.as_ref().unwrap().center.clone(), 3.0);
    assert_eq!(probe_quasi_convexity(&prob.objective, &wide, 200, 5).unwrap().status, Status::Fail);
}

#[test]
fn quasi_fejer_on_convex_pairs() {
    for prob in [p1(), p3()] {
        let oracle = prob.oracle(1e-3).unwrap();
        let q = prob.critical_point.clone().unwrap();
        let config = RunConfig { tol_critical: prob.tol_critical, ..RunConfig::default() };
        for rule in [StepSizeRule::Armijo { nu: 0.5 }, StepSizeRule::Constant { t: prob.constant_step.unwrap() }] {
            let tr = run_with_merit(&prob.objective, &prob.default_start, &rule, &config, Some(&oracle)).unwrap();
            let rep = check_quasi_fejer(&tr, &prob.objective, std::slice::from_ref(&q)).unwrap();
            assert_eq!(rep.status, Status::Pass, "{}: {rep:?}", prob.id);
        }
    }
}

#[test]
fn qc_distance_inequality() {
    let prob = p3();
    let f = &prob.objective;
    assert!((2.0 * hbar(1.0) - 2.0 * 1f64.tanh()).abs() < 1e-15);
    assert!(hbar(1.0) > 0.75);
    let ball = prob.quasi_convex_ball.clone().unwrap();
    let rep = qc_distance_monte_carlo(f, &ball, 1.0, 1000, 7).unwrap();
    assert_eq!(rep.status, Status::Pass, "{rep:?}");
    assert!((rep.constants["denominator_at_1"] - 1.5231883119115297).abs() < 1e-12);

    // t = 0 is the equality boundary
    let (a1, _) = p3_anchors();
    let p = prob.default_start.clone();
    let v = solve_exact(&p, &f.gradients(&p).unwrap(), DEFAULT_TOL).unwrap().v;
    let out = check_qc_distance_inequality(f, -1.0, &p, &v, 0.0, &a1).unwrap();
    assert_eq!(out.status, Status::Skipped);
    let q = prob.critical_point.clone().unwrap();
    let out = check_qc_distance_inequality(f, -1.0, &p, &v, 0.0, &q).unwrap();
    assert_eq!((out.status, out.margin), (Status::Pass, 0.0));
    // too long a step violates the precondition
    let out = check_qc_distance_inequality(f, -1.0, &p, &v, 2.0 / v.norm(), &q).unwrap();
    assert_eq!(out.status, Status::Skipped);
}

#[test]
fn sublevel_sets() {
    let prob = p1();
    let ladder = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let rep = check_sublevel_bounded(&prob.objective, &prob.default_start, &ladder, 1000, 8).unwrap();
    assert_eq!(rep.status, Status::Pass);

    // (½x², ½(x−1)²) on ℝ² is constant along y
    let m = Manifold::Euclidean { dim: 2 };
    let flat = VectorObjective::new("flat", m)
        .with(FnComponent::new(|x| 0.5 * x[0] * x[0], |x| DVector::from_vec(vec![x[0], 0.0])))
        .with(FnComponent::new(|x| 0.5 * (x[0] - 1.0).powi(2), |x| DVector::from_vec(vec![x[0] - 1.0, 0.0])));
    let p0 = ManifoldPoint::from_slice(m, &[-0.5, 0.0]).unwrap();
    let rep = check_sublevel_bounded(&flat, &p0, &ladder, 1000, 9).unwrap();
    assert_eq!(rep.status, Status::Fail);
    assert!(rep.detail.starts_with("unbounded"));
    assert_eq!(rep.constants["largest_member_radius"], 64.0);

    // p0 Pareto: the sublevel set is {p0}
    let prob = scalar_quadratic();
    let p0 = ManifoldPoint::from_slice(prob.manifold(), &[0.0]).unwrap();
    let rep = check_sublevel_bounded(&prob.objective, &p0, &ladder, 1000, 10).unwrap();
    assert_eq!(rep.status, Status::Pass);
    assert_eq!(rep.constants["largest_member_radius"], 0.0);
}

#[test]
fn merit_probes_on_shipped_problems() {
    for prob in rmod::problems::shipped_problems() {
        let oracle = prob.oracle(1e-3).unwrap();
        let refs = prob.reference_points(1e-2).unwrap();
        assert_eq!(probe_weak_pareto(&prob.objective, &oracle, &refs).unwrap().status, Status::Pass, "{}", prob.id);
        let rep = probe_phi_lipschitz(&prob.objective, &oracle, &prob.start_ball, 100, 11).unwrap();
        assert_eq!(rep.status, Status::Pass, "{}", prob.id);
    }
}

#[test]
fn rate_on_p5_with_estimated_alpha() {
    let prob = p5();
    let oracle = prob.oracle(1e-3).unwrap();
    let est = estimate_kl(&prob.objective, &oracle, prob.kl_ball.as_ref().unwrap(), 2000, 12).unwrap();
    let config = RunConfig { tol_critical: 1e-8, ..RunConfig::default() };
    for rule in [StepSizeRule::Armijo { nu: 0.5 }, StepSizeRule::Constant { t: 0.05 }] {
        let tr = run_with_merit(&prob.objective, &prob.default_start, &rule, &config, Some(&oracle)).unwrap();
        let rate = check_linear_rate(&tr, est.alpha_hat.unwrap(), oracle.slack()).unwrap();
        assert_eq!(rate.report.status, Status::Pass, "{:?}", rate.report);
        assert!(tr.iterations() <= 200);
    }
}

#[test]
fn reports_are_deterministic() {
    let prob = p3();
    let a = probe_quasi_convexity(&prob.objective, prob.quasi_convex_ball.as_ref().unwrap(), 50, 13).unwrap();
    let b = probe_quasi_convexity(&prob.objective, prob.quasi_convex_ball.as_ref().unwrap(), 50, 13).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn refining_the_reference_set_never_lowers_phi(seed in 0u64..10_000) {
        let prob = p1();
        let coarse = prob.reference_points(0.1).unwrap();
        let mut fine = coarse.clone();
        fine.extend(prob.reference_points(0.013).unwrap());
        let lip = prob.value_lipschitz;
        let oc = MeritOracle::new(&prob.objective, coarse, 0.1, lip).unwrap();
        let of = MeritOracle::new(&prob.objective, fine, 0.013, lip).unwrap();
        let mut r = rng(seed);
        let p = sample_in_ball(&prob.start_ball.center, prob.start_ball.radius, &mut r).unwrap();
        let (c, f) = (oc.phi(&prob.objective, &p).unwrap(), of.phi(&prob.objective, &p).unwrap());
        prop_assert!(f >= c);
        prop_assert!(f - c <= oc.slack());
    }

    #[test]
    fn runs_do_not_increase_phi(seed in 0u64..10_000) {
        let prob = p3();
        let oracle = prob.oracle(1e-3).unwrap();
        let mut r = rng(seed);
        let p0 = sample_in_ball(&prob.start_ball.center, prob.start_ball.radius, &mut r).unwrap();
        let config = RunConfig { tol_critical: prob.tol_critical, ..RunConfig::default() };
        let tr = run_with_merit(&prob.objective, &p0, &StepSizeRule::Armijo { nu: 0.5 }, &config, Some(&oracle)).unwrap();
        prop_assert_eq!(check_phi_descent(&tr, oracle.slack()).status, Status::Pass);
        prop_assert_eq!(check_summability(&tr, oracle.slack()).status, Status::Pass);
        let plain = run(&prob.objective, &p0, &StepSizeRule::Armijo { nu: 0.5 }, &config).unwrap();
        prop_assert_eq!(plain.records.len(), tr.records.len());
    }
}
