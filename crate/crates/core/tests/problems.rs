use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use tfcdr::{
    caputo_quadrature_oracle, error_vs_exact, example1, example2, run, Error, FractionalParams,
    HalfStepHistory, Problem, ProblemConfig,
};

/// |cD^λu − q u_xx + p u_x + g u − s| with the Caputo part from quadrature.
fn residual(
    prob: &Problem,
    lambda: f64,
    x: f64,
    t: f64,
    ut: impl Fn(f64) -> f64,
    uxx: f64,
    ux: f64,
) -> f64 {
    let d = caputo_quadrature_oracle(ut, lambda, t, 4).unwrap();
    let u = prob.exact(x, t).unwrap();
    (d - prob.q(t) * uxx + prob.p(t) * ux + prob.g(x, t) * u - prob.source(x, t)).abs()
}

#[test]
fn manufactured_solutions_satisfy_the_equation() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    for lambda in [0.1, 0.5, 0.66, 0.9] {
        let p1 = example1(lambda).unwrap();
        let p2 = example2(lambda).unwrap();
        for _ in 0..20 {
            let x: f64 = rng.random_range(0.0..1.0);
            let t: f64 = rng.random_range(0.0..1.25);
            let r = residual(&p1, lambda, x, t, |_| x.sin(), -t * x.sin(), t * x.cos());
            assert!(r <= 1e-6, "example1 λ={lambda} ({x}, {t}): {r}");
            let sx = (PI * x).sin();
            let r = residual(&p2, lambda, x, t, |s| 2.0 * s * sx, -PI * PI * t * t * sx, PI * t * t * (PI * x).cos());
            assert!(r <= 1e-6, "example2 λ={lambda} ({x}, {t}): {r}");
        }
    }
}

#[test]
fn example_point_values() {
    let p1 = example1(0.3).unwrap();
    assert!((p1.exact(PI / 2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(p1.source(0.7, 0.0), 0.0);
    assert_eq!((p1.q(0.4), p1.p(0.4), p1.g(0.2, 0.4)), (1.0, 1.0, 0.0));
    let p2 = example2(0.3).unwrap();
    assert!((p2.exact(0.5, 1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(p2.g(0.3, PI / 4.0).abs() < 1e-15);
    assert_eq!(p2.q(0.5), 0.5f64.exp());
}

#[test]
fn sign_conditions_hold_on_examples() {
    for lambda in [0.2, 0.9] {
        for prob in [example1(lambda).unwrap(), example2(lambda).unwrap()] {
            assert!(prob.horizon() >= prob.final_time() + 0.2);
            let r = prob.sign_conditions();
            assert!(r.holds(), "{}: {r:?}", prob.name());
            assert!(r.q_min >= 1.0 - 1e-15);
        }
    }
    // violations are reported, not fatal
    let bad = Problem::builder("anti")
        .p(|_| -1.0)
        .initial(|_| 0.0)
        .boundary(|_, _| 0.0)
        .build()
        .unwrap();
    let r = bad.sign_conditions();
    assert!(!r.holds() && r.p_min == -1.0);
}

#[test]
fn inconsistent_exact_data_rejected() {
    let err = Problem::builder("off")
        .exact(|x, t| t * x)
        .initial(|_| 1.0)
        .build()
        .unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
}

#[test]
fn error_of_exact_history_is_zero() {
    for prob in [example1(0.5).unwrap(), example2(0.5).unwrap()] {
        let grid = prob.grid(16, 9).unwrap();
        let e = error_vs_exact(&prob.exact_history(&grid).unwrap(), &prob).unwrap();
        assert!(e.linf_l2 <= 1e-14 && e.l2_l2 <= 1e-14);
    }
}

#[test]
fn error_of_shifted_history() {
    let prob = example2(0.5).unwrap();
    let (m, n) = (20, 7);
    let grid = prob.grid(m, n).unwrap();
    let c = -0.125;
    let hist = HalfStepHistory::from_fn(grid, 2 * n + 1, |l, x| {
        let j = (x / grid.h()).round() as usize;
        let shift = if j >= 1 && j < m { c } else { 0.0 };
        prob.exact(x, grid.t_half(l)).unwrap() + shift
    });
    let e = error_vs_exact(&hist, &prob).unwrap();
    let expect = c.abs() * ((m - 1) as f64 * grid.h()).sqrt();
    assert!((e.linf_l2 - expect).abs() <= 1e-13);
    // every one of the 2N half levels carries the same error
    assert!((e.l2_l2 - expect * prob.final_time().sqrt()).abs() <= 1e-13);
}

#[test]
fn error_needs_exact_solution() {
    let prob = Problem::builder("plain").initial(|_| 0.0).boundary(|_, _| 0.0).build().unwrap();
    let grid = prob.grid(8, 4).unwrap();
    let hist = HalfStepHistory::from_fn(grid, 9, |_, _| 0.0);
    assert!(matches!(error_vs_exact(&hist, &prob), Err(Error::MissingExact(_))));
    assert!(prob.exact_history(&grid).is_err());
}

#[test]
fn error_needs_complete_history() {
    let prob = example1(0.5).unwrap();
    let grid = prob.grid(8, 4).unwrap();
    let hist = HalfStepHistory::from_fn(grid, 5, |_, _| 0.0);
    assert!(error_vs_exact(&hist, &prob).is_err());
}

fn heat_config() -> ProblemConfig {
    ProblemConfig {
        name: Some("manufactured".into()),
        q: Some("1".into()),
        source: Some("(pi^2 * t^2 + 2 * t^(2 - lambda) / gamma(3 - lambda)) * sin(pi * x)".into()),
        initial: Some("0".into()),
        boundary: Some("t^2 * sin(pi * x)".into()),
        exact: Some("t^2 * sin(pi * x)".into()),
        ..Default::default()
    }
}

#[test]
fn config_problem_matches_closed_forms() {
    let lambda = 0.4;
    let prob = heat_config().build(lambda).unwrap();
    let g3 = tfcdr::gamma_fn(3.0 - lambda).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..50 {
        let (x, t): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.25));
        let s = (PI * PI * t * t + 2.0 * t.powf(2.0 - lambda) / g3) * (PI * x).sin();
        assert!((prob.source(x, t) - s).abs() <= 1e-14 * s.abs().max(1.0));
        assert_eq!(prob.p(t), 0.0);
    }
    // error is temporal at this mesh: quartering k gains at least 4^{1.5}
    let err = |n| {
        let out = run(&prob, prob.grid(16, n).unwrap(), FractionalParams::new(lambda).unwrap()).unwrap();
        error_vs_exact(&out.history, &prob).unwrap().l2_l2
    };
    let (e1, e2) = (err(20), err(80));
    assert!(e1 / e2 > 8.0 && e2 < 1e-4, "{e1} {e2}");
}

#[test]
fn config_errors() {
    let mut c = heat_config();
    c.q = Some("1 + x".into());
    assert!(matches!(c.build(0.5), Err(Error::Config(_))));
    let mut c = heat_config();
    c.initial = Some("t".into());
    assert!(matches!(c.build(0.5), Err(Error::Config(_))));
    let mut c = heat_config();
    c.source = Some("sin(".into());
    assert!(matches!(c.build(0.5), Err(Error::Config(_))));
    let mut c = heat_config();
    c.boundary = None;
    c.boundary_left = Some("0".into());
    assert!(matches!(c.build(0.5), Err(Error::Config(_))));
    assert!(heat_config().build(1.0).is_err());
}

#[test]
fn separate_boundary_sides() {
    let c = ProblemConfig {
        initial: Some("x".into()),
        boundary_left: Some("x + t".into()),
        boundary_right: Some("x - t".into()),
        ..Default::default()
    };
    let prob = c.build(0.5).unwrap();
    assert_eq!(prob.boundary(0.1, 0.5), 0.6);
    assert_eq!(prob.boundary(0.9, 0.5), 0.4);
}
