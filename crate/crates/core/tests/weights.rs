mod common;

use common::{stirling_gamma, RefWeights};
use proptest::prelude::*;
use tfcdr::weights::{
    a_sequence, check_inequalities, full_level_weights, half_level_weights, stability_condition,
    stability_residual, FractionalParams, Inequality, Level, WeightTable,
};
use tfcdr::{gamma_fn, Error};

fn params(l: f64) -> FractionalParams {
    FractionalParams::new(l).unwrap()
}

#[test]
fn gamma_matches_series_oracle() {
    let g = gamma_fn(1.5).unwrap();
    assert!((g - 0.886_226_925_452_758).abs() < 1e-15);
    let mut x = 0.05;
    while x < 30.0 {
        let (a, b) = (gamma_fn(x).unwrap(), stirling_gamma(x));
        assert!((a - b).abs() <= 1e-12 * b.abs(), "x = {x}: {a} vs {b}");
        x += 0.173;
    }
    assert!(matches!(gamma_fn(-0.5), Err(Error::GammaDomain(_))));
}

#[test]
fn expanded_weights_match_reference() {
    // the a-sequence collects exactly the coefficients of the expanded sums
    for lambda in [0.1, 0.45, 0.9] {
        let p = params(lambda);
        let r = RefWeights { lambda };
        for i in 0..25 {
            // d − f cancels leading powers of A ~ i, so rounding grows like i²
            let tol = 1e-15 * ((i + 2) * (i + 2)) as f64;
            let (a, b) = (a_sequence(&p, Level::Half(i)).values, r.half_coeffs(i));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= tol * y.abs().max(1.0), "half {i}: {x} vs {y}");
            }
            let (a, b) = (a_sequence(&p, Level::Full(i)).values, r.full_coeffs(i));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= tol * y.abs().max(1.0), "full {i}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn full_level_first_entry() {
    let w = full_level_weights(&params(0.5), 0);
    let expect = 1.5f64.sqrt() - 0.5f64.sqrt();
    assert!((w.d_tilde[0] - expect).abs() < 1e-15);
    assert!((w.d_tilde[0] - 0.51764).abs() < 5e-6);
}

#[test]
fn a_sequence_example_values() {
    let p = params(0.5);
    assert_eq!(a_sequence(&p, Level::Half(0)).values, vec![1.0]);
    let w = full_level_weights(&p, 0);
    let a = a_sequence(&p, Level::Full(0));
    assert_eq!(a.values, vec![w.d_tilde[0] - w.f_tilde[0], w.f_tilde[0] + w.f_tilde[1]]);
}

#[test]
fn half_level_5_strictly_increasing() {
    let a = a_sequence(&params(0.4), Level::Half(5));
    for pair in a.values.windows(2) {
        assert!(pair[0] < pair[1]);
    }
}

#[test]
fn lemma_suite_over_claimed_range() {
    for lambda in [0.1, 0.3, 0.5, 0.6] {
        let r = check_inequalities(&params(lambda), 50);
        assert!(r.passed(), "lambda {lambda}: {:?}", r.failures.first());
        assert!(r.total_checks() > 5_000);
    }
}

#[test]
fn stability_residuals() {
    // λ = 0.9, half level i = 1, from the reference coefficients
    let r = RefWeights { lambda: 0.9 }.half_coeffs(1);
    let alpha = 0.1;
    let expect = 4.0 * alpha * alpha - (1.0 + 4.0 * alpha) * (r[2] / r[1] - 1.0);
    let (flag, res) = stability_condition(&params(0.9), Level::Half(1)).unwrap();
    assert!((res - expect).abs() < 1e-12);
    assert_eq!(flag, expect <= 0.0);

    let r = RefWeights { lambda: 0.5 }.full_coeffs(10);
    let expect = 4.0 * 0.25 - 3.0 * (r[21] / r[20] - 1.0);
    let (flag, res) = stability_condition(&params(0.5), Level::Full(10)).unwrap();
    assert!((res - expect).abs() < 1e-12);
    assert_eq!(flag, expect <= 0.0);

    assert!(stability_residual(0.0, 1.7) < 0.0);
}

#[test]
fn report_counts_every_inequality() {
    let r = check_inequalities(&params(0.5), 5);
    for which in Inequality::ALL {
        assert!(r.checks_of(which) > 0, "{which:?}");
        assert_eq!(r.failures_of(which), 0);
    }
}

proptest! {
    #[test]
    fn shift_identity(lambda in 0.01f64..0.99, i in 1usize..60) {
        let p = params(lambda);
        let full = full_level_weights(&p, i);
        let half = half_level_weights(&p, i);
        for l in 1..=i {
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
            prop_assert!(rel(full.f_tilde[l], half.f_tilde[l - 1]) <= 1e-14);
            prop_assert!(rel(full.d_tilde[l], half.d_tilde[l - 1]) <= 1e-14);
        }
        prop_assert_eq!(full.f_tilde[i + 1], half.f_tilde[i]);
    }

    #[test]
    fn weights_positive(lambda in 0.01f64..0.99, i in 0usize..80) {
        let p = params(lambda);
        let h = half_level_weights(&p, i);
        prop_assert!(h.f_tilde.iter().chain(&h.d_tilde).chain(h.fdot_tilde.iter()).all(|&w| w > 0.0));
        let f = full_level_weights(&p, i);
        prop_assert!(f.f_tilde.iter().chain(&f.d_tilde).all(|&w| w > 0.0));
        // d − f > 0 is only claimed below 2/3; near λ = 1 it fails at i = 0
        if p.lemma_applies() {
            for (d, w) in h.d_tilde.iter().zip(&h.f_tilde).chain(f.d_tilde.iter().zip(&f.f_tilde)) {
                prop_assert!(d - w > 0.0);
            }
        }
    }

    #[test]
    fn monotone_below_two_thirds(lambda in 0.01f64..0.66, i in 0usize..60, full in any::<bool>()) {
        let level = if full { Level::Full(i) } else { Level::Half(i) };
        let a = a_sequence(&params(lambda), level);
        for pair in a.values.windows(2) {
            prop_assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn scaling_composes(lambda in 0.01f64..0.99, k in 1e-5f64..0.5, i in 0usize..20) {
        let p = params(lambda);
        let c = p.scale(k);
        let expect_c = k.powf(1.0 - lambda) / stirling_gamma(2.0 - lambda);
        prop_assert!((c - expect_c).abs() <= 1e-12 * expect_c);
        let w = half_level_weights(&p, i);
        let s = w.scaled(c);
        for (a, b) in s.f_tilde.iter().zip(&w.f_tilde) {
            prop_assert_eq!(*a, c * b);
        }
    }

    #[test]
    fn table_equals_closed_form(lambda in 0.01f64..0.99, i in 0usize..40) {
        let p = params(lambda);
        let t = WeightTable::new(&p, 41);
        prop_assert_eq!(t.a_sequence(Level::Half(i)).unwrap(), a_sequence(&p, Level::Half(i)));
        prop_assert_eq!(t.a_sequence(Level::Full(i)).unwrap(), a_sequence(&p, Level::Full(i)));
    }
}
