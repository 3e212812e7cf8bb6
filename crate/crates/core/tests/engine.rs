mod common;

use common::rng;
use proptest::prelude::*;
use rmod::direction::{solve_exact, DirectionMode, DEFAULT_TOL};
use rmod::engine::{run, run_with_merit, CustomRule, RunConfig, StepSizeRule, Termination};
use rmod::geometry::sample_in_ball;
use rmod::harness::{check_monotone, check_movement, check_step_bound, check_sufficient_decrease, Status};
use rmod::problems::{p3, p3_anchors, shipped_problems};

#[test]
fn p3_limit_lies_on_the_anchor_segment() {
    let prob = p3();
    let (a1, a2) = p3_anchors();
    let config = RunConfig { tol_critical: prob.tol_critical, max_iter: 2000, ..RunConfig::default() };
    let mut r = rng(3);
    for _ in 0..5 {
        let p0 = sample_in_ball(&prob.start_ball.center, prob.start_ball.radius, &mut r).unwrap();
        let tr = run(&prob.objective, &p0, &StepSizeRule::Armijo { nu: 0.5 }, &config).unwrap();
        assert_eq!(tr.termination, Termination::CriticalReached);
        let p = tr.point(tr.records.len() - 1).unwrap();
        let v = solve_exact(&p, &prob.objective.gradients(&p).unwrap(), DEFAULT_TOL).unwrap();
        assert!(v.norm() <= prob.tol_critical);
        // on the segment: the triangle inequality is tight and log_{a1} p is
        // a non-negative multiple of log_{a1} a2
        let (d1, d2, d12) = (a1.dist(&p).unwrap(), p.dist(&a2).unwrap(), a1.dist(&a2).unwrap());
        assert!(d1 + d2 - d12 <= 1e-4, "off segment by {}", d1 + d2 - d12);
        let u = a1.log(&p).unwrap();
        let w = a1.log(&a2).unwrap();
        let cross = u.norm_squared() * w.norm_squared() - u.inner(&w).unwrap().powi(2);
        assert!(cross.max(0.0).sqrt() <= 1e-4 * w.norm());
        assert!(u.inner(&w).unwrap() >= -1e-10);
    }
}

#[test]
fn identical_inputs_give_identical_csv() {
    for prob in shipped_problems() {
        let config = RunConfig {
            direction_mode: DirectionMode::SigmaApprox,
            sigma: 0.25,
            tol_critical: prob.tol_critical,
            max_iter: 2000,
            ..RunConfig::default()
        };
        let oracle = prob.oracle(1e-3).unwrap();
        let bytes = || {
            let tr = run_with_merit(&prob.objective, &prob.default_start, &StepSizeRule::Armijo { nu: 0.5 }, &config, Some(&oracle))
                .unwrap();
            let mut buf = Vec::new();
            tr.write_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(bytes(), bytes(), "{}", prob.id);
    }
}

#[test]
fn sigma_mode_stops_on_the_exact_norm() {
    for prob in shipped_problems() {
        let config = RunConfig {
            direction_mode: DirectionMode::SigmaApprox,
            sigma: 0.5,
            tol_critical: prob.tol_critical,
            max_iter: 2000,
            ..RunConfig::default()
        };
        let tr = run(&prob.objective, &prob.default_start, &StepSizeRule::Armijo { nu: 0.5 }, &config).unwrap();
        assert_eq!(tr.termination, Termination::CriticalReached, "{}", prob.id);
        let last = tr.last().unwrap();
        assert!(last.norm_v_exact <= prob.tol_critical);
        let p = tr.point(tr.records.len() - 1).unwrap();
        let fresh = solve_exact(&p, &prob.objective.gradients(&p).unwrap(), DEFAULT_TOL).unwrap();
        assert!((fresh.norm() - last.norm_v_exact).abs() <= 1e-12);
    }
}

#[test]
fn custom_rules_are_validated() {
    let prob = p3();
    let config = RunConfig::default();
    let halving = StepSizeRule::Custom(CustomRule::new("half", |_, _, _| 0.3));
    let ok = run(&prob.objective, &prob.default_start, &halving, &config).unwrap();
    assert_eq!(ok.termination, Termination::CriticalReached);
    assert_eq!(check_sufficient_decrease(&ok).status, Status::Pass);

    let late = StepSizeRule::Custom(CustomRule::new("late", |_, _, k| if k < 3 { 0.3 } else { 0.0 }));
    let tr = run(&prob.objective, &prob.default_start, &late, &config).unwrap();
    assert_eq!(tr.termination, Termination::Error);
    assert_eq!(tr.iterations(), 3);
    assert!(tr.error.unwrap().contains("outside"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn trace_invariants_hold_from_random_starts(which in 0usize..6, seed in 0u64..1000, sigma in prop::sample::select(vec![0.0, 0.25, 0.5]), armijo in any::<bool>()) {
        let prob = &shipped_problems()[which];
        let mut r = rng(seed);
        let p0 = sample_in_ball(&prob.start_ball.center, prob.start_ball.radius, &mut r).unwrap();
        let rule = match (armijo, prob.constant_step) {
            (false, Some(t)) => StepSizeRule::Constant { t },
            _ => StepSizeRule::Armijo { nu: 0.5 },
        };
        let config = RunConfig {
            sigma,
            direction_mode: if sigma > 0.0 { DirectionMode::SigmaApprox } else { DirectionMode::Exact },
            tol_critical: prob.tol_critical,
            max_iter: 2000,
            ..RunConfig::default()
        };
        let tr = run(&prob.objective, &p0, &rule, &config).unwrap();
        prop_assert_eq!(tr.termination, Termination::CriticalReached);
        prop_assert_eq!(check_monotone(&tr).status, Status::Pass);
        prop_assert_eq!(check_step_bound(&tr).status, Status::Pass);
        prop_assert_eq!(check_movement(&tr).unwrap().status, Status::Pass);
        prop_assert_eq!(check_sufficient_decrease(&tr).status, Status::Pass);
    }
}
