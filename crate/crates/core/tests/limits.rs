//! Limiting cases that reduce to classical statements.

use num_rational::BigRational;

use pqgrowth::discretization::{inner_product, tau_shift, DiscreteField, Grid};
use pqgrowth::exponents::{power_weight_exponents, ExponentProfile, ExtExponent, GapClass};

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn bounded_data_threshold_is_one_plus_one_over_n() {
    for n in 1..=6u32 {
        let pr = ExponentProfile::new(
            ExtExponent::from_ratio(3, 1),
            ExtExponent::from_ratio(3, 1),
            n,
            ExtExponent::Infinite,
            ExtExponent::Infinite,
        )
        .unwrap();
        assert_eq!(pr.threshold(), frac(n as i64 + 1, n as i64));
        assert_eq!(pr.sigma(), frac(3, 1));
    }
}

#[test]
fn nondegenerate_threshold_drops_one_over_r() {
    // s = inf: the threshold is 1 + 1/n - 1/r
    let pr = ExponentProfile::new(
        ExtExponent::from_ratio(2, 1),
        ExtExponent::from_ratio(2, 1),
        3,
        ExtExponent::from_ratio(12, 1),
        ExtExponent::Infinite,
    )
    .unwrap();
    assert_eq!(pr.threshold(), frac(1, 1) + frac(1, 3) - frac(1, 12));
}

#[test]
fn equal_exponents_are_regular_with_bounded_data() {
    let pr = ExponentProfile::from_f64(2.0, 2.0, 4, f64::INFINITY, f64::INFINITY).unwrap();
    assert_eq!(pr.classify(), GapClass::Regular);
    assert!(pr.trudinger());
}

#[test]
fn one_dimensional_square_root_weight() {
    // \int |x|^{-alpha s} and \int |x|^{(alpha-1) r} near 0 in one dimension
    assert_eq!(power_weight_exponents(0.5, 1).unwrap(), (2.0, 2.0));
}

// supported well inside the domain so every shift stays in range
fn bump(x: f64) -> f64 {
    (0.16 - x * x).max(0.0)
}

#[test]
fn summation_by_parts_on_compact_support() {
    let g = Grid::new(1, 21).unwrap();
    let f = DiscreteField::from_fn(&g, 1, |x, o| o[0] = bump(x[0]) * x[0].sin()).unwrap().as_array();
    let w = DiscreteField::from_fn(&g, 1, |x, o| o[0] = bump(x[0] - 0.1) * (2.0 * x[0]).cos()).unwrap().as_array();
    for k in 1..4 {
        let lhs = inner_product(&f, &tau_shift(&w, 0, k).unwrap());
        let rhs = inner_product(&w, &tau_shift(&f, 0, -k).unwrap());
        assert!((lhs - rhs).abs() < 1e-14, "k = {k}");
    }
}

#[test]
fn cli_reports_classical_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_pqgrowth"))
        .args(["exponents", "--p", "2", "--q", "3", "--n", "2", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["threshold"], 1.5);
    assert_eq!(v["class"], "boundary");
}
