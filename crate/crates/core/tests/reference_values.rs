//! Hand-computed reference values, frozen as literals. Each comment states how the
//! number was obtained independently of this crate.

use num_rational::BigRational;

use pqgrowth::density::{v_p_map, vp_equivalence_ratio, Coefficient, Density};
use pqgrowth::diagnostics::{
    certify, check_lipschitz_estimate, compute_k, hole_filling_check, hole_filling_constant, weighted_sobolev_check,
    KVariant, CERTIFY_TOL,
};
use pqgrowth::discretization::{
    discrete_gradient, discrete_second_differences, DiscreteField, DiscreteProblem, Grid, Region, WeightRule,
};
use pqgrowth::exponents::{
    counterexample_window, gap_implies_trudinger, moser_ladder, power_weight_exponents, ExponentProfile, ExtExponent,
    GapClass,
};
use pqgrowth::oracle::{blow_up_rate, euler_invariant_spread, exact_minimizer, Oracle1DProblem};
use pqgrowth::solver::{minimize, BoundaryData, SolveOptions};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ext(n: i64, d: i64) -> ExtExponent {
    ExtExponent::from_ratio(n, d)
}

fn r20() -> ExponentProfile {
    ExponentProfile::new(ext(2, 1), ext(21, 10), 2, ext(20, 1), ext(20, 1)).unwrap()
}

#[test]
fn raw_density_value_at_quarter() {
    // 0.25^0.5 * (1 + 1)^1 = 1
    let d = Density::power_weight(Coefficient::power_weight(0.5, &[0.0]).unwrap(), 2.0).unwrap();
    assert_eq!(d.eval_raw(&[0.25], &[1.0]).unwrap(), 1.0);
    // the normalized value subtracts a(x) * 1
    assert_eq!(d.eval(&[0.25], &[1.0]).unwrap(), 0.5);
}

#[test]
fn double_phase_at_zero_gradient() {
    let one = || Coefficient::constant(1.0, 2).unwrap();
    let d = Density::double_phase(one(), 2.0, one(), 4.0).unwrap();
    assert_eq!(d.eval_raw(&[0.3, -0.2], &[0.0, 0.0]).unwrap(), 2.0);
    assert_eq!(d.eval(&[0.3, -0.2], &[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn quadratic_hessian_and_orthogonal_direction() {
    let d = Density::power_weight(Coefficient::constant(1.0, 2).unwrap(), 2.0).unwrap();
    assert!(close(d.hessian_form(&[0.1, 0.1], &[3.0, -1.0], &[0.5, 2.0]).unwrap(), 2.0 * 4.25, 1e-14));
    // lambda perpendicular to xi: (g_t/|xi|) |lambda|^2 with g = 0.5((1+t^2)^2 - 1), g_t/t = 2(1+t^2)
    let d4 = Density::power_weight(Coefficient::constant(0.5, 2).unwrap(), 4.0).unwrap();
    let form = d4.hessian_form(&[0.0, 0.0], &[1.0, 1.0], &[1.0, -1.0]).unwrap();
    assert!(close(form, 2.0 * 3.0 * 2.0, 1e-12));
}

#[test]
fn v_p_values() {
    assert_eq!(v_p_map(&[0.0, 0.0], 3.7), vec![0.0, 0.0]);
    assert_eq!(v_p_map(&[0.3, -2.0], 2.0), vec![0.3, -2.0]);
    let v = v_p_map(&[1.0, 0.0], 4.0);
    assert!(close(v[0], 2f64.sqrt(), 1e-15) && v[1] == 0.0);
    // |V_4(xi)|^2 / |xi|^2 / (1 + 1)^1 = 2 / 2
    assert!(close(vp_equivalence_ratio(&[1.0, 0.0], &[0.0, 0.0], 4.0).unwrap(), 1.0, 1e-15));
}

#[test]
fn gap_margin_r20() {
    // (20/21)(1 + 1/2 - 1/20) - 1 = 29/21 - 1 = 8/21
    let pr = ExponentProfile::new(ext(2, 1), ext(2, 1), 2, ext(20, 1), ext(20, 1)).unwrap();
    assert_eq!(pr.gap_margin(), BigRational::new(8.into(), 21.into()));
    assert_eq!(pr.classify(), GapClass::Regular);
}

#[test]
fn trudinger_implication_examples() {
    assert!(gap_implies_trudinger(2, &ExtExponent::Infinite, &ExtExponent::Infinite));
    // 1/20 + 1/20 = 0.1 < 1/2
    assert!(gap_implies_trudinger(2, &ext(20, 1), &ext(20, 1)));
    // 2/1.9 > 1
    assert!(!gap_implies_trudinger(1, &ext(19, 10), &ext(19, 10)));
}

#[test]
fn counterexample_windows() {
    // r = s = 4: alpha must exceed 3/4 and stay below 1/4
    let w = counterexample_window(0.5, 2.0, &ext(4, 1), &ext(4, 1)).unwrap();
    assert!(!w.window_nonempty && w.window == (0.75, 0.25));
    // r = s = 3/2: (1/3, 2/3)
    let w = counterexample_window(0.5, 2.0, &ext(3, 2), &ext(3, 2)).unwrap();
    assert!(w.window_nonempty && w.a_inv_integrable && w.k_integrable);
    assert!(close(w.window.0, 1.0 / 3.0, 1e-15) && close(w.window.1, 2.0 / 3.0, 1e-15));
}

#[test]
fn sobolev_exponent_and_ladder_r20() {
    let pr = r20();
    // 2ns/(n(s+1) - 2s) = 80/2
    assert_eq!(pr.two_star_s(), ext(40, 1));
    // rs/(rs - 2s - r) = 400/340
    assert_eq!(pr.m().unwrap(), BigRational::new(20.into(), 17.into()));
    let ladder = moser_ladder(&ExponentProfile::new(ext(2, 1), ext(2, 1), 2, ext(20, 1), ext(20, 1)).unwrap(), 1)
        .unwrap();
    // p0 = 2 * 20/17, ratio = 40 / (40/17) = 17, p1 = 40
    assert!(close(ladder.p0, 40.0 / 17.0, 1e-15));
    assert_eq!(ladder.ratio, 17.0);
    assert!(close(ladder.exponents[1], 40.0, 1e-13));
}

#[test]
fn theta_and_young_r20() {
    let pr = r20();
    // (40(42 - 40 + 2) + 84) / (400 * 2.2) = 244/880
    assert_eq!(pr.theta().unwrap(), BigRational::new(244.into(), 880.into()));
    // 0.2 * 40 / (2 (40 - 40/17)) = 8 / (1280/17) = 17/160
    assert_eq!(pr.young_ratio().unwrap(), BigRational::new(17.into(), 160.into()));
    // p = q: theta = n/r + n/s
    let eq = ExponentProfile::new(ext(3, 1), ext(3, 1), 2, ext(20, 1), ext(20, 1)).unwrap();
    assert_eq!(eq.theta().unwrap(), BigRational::new(1.into(), 5.into()));
}

#[test]
fn power_weight_integrability_2d() {
    // polar coordinates: |x|^{-alpha s} r dr integrable iff alpha s < 2
    assert_eq!(power_weight_exponents(0.5, 2).unwrap(), (4.0, 4.0));
}

#[test]
fn cell_gradients_of_square() {
    let g = Grid::new(1, 5).unwrap();
    let f = DiscreteField::from_fn(&g, 1, |x, o| o[0] = x[0] * x[0]).unwrap();
    assert_eq!(discrete_gradient(&f).values, vec![-1.5, -0.5, 0.5, 1.5]);
}

#[test]
fn second_differences_examples() {
    let g = Grid::new(1, 5).unwrap();
    let f = DiscreteField::from_fn(&g, 1, |x, o| o[0] = x[0] * x[0]).unwrap();
    let d2 = discrete_second_differences(&f);
    assert!(d2.valid.iter().all(|ij| d2.at(ij)[0] == 2.0));
    let g2 = Grid::new(2, 5).unwrap();
    let xy = DiscreteField::from_fn(&g2, 1, |x, o| o[0] = x[0] * x[1]).unwrap();
    let d2 = discrete_second_differences(&xy);
    assert!(d2.valid.iter().all(|ij| d2.at(ij)[1] == 1.0 && d2.at(ij)[2] == 1.0 && d2.at(ij)[0] == 0.0));
}

#[test]
fn discrete_energies() {
    let g = Grid::new(1, 9).unwrap();
    let u = DiscreteField::from_fn(&g, 1, |x, o| o[0] = x[0]).unwrap();
    let unit = Density::power_weight(Coefficient::constant(1.0, 1).unwrap(), 2.0).unwrap();
    let ph = unit.cell_phases(&g, WeightRule::CellCenter).unwrap();
    assert!(close(DiscreteProblem::new(&u, &ph).energy_of(&u).unwrap(), 2.0, 1e-14));

    // two cells centred at -0.5, 0.5, each sqrt(0.5) * 1 * 1
    let g3 = Grid::new(1, 3).unwrap();
    let u3 = DiscreteField::from_fn(&g3, 1, |x, o| o[0] = x[0]).unwrap();
    let w = Density::power_weight(Coefficient::power_weight(0.5, &[0.0]).unwrap(), 2.0).unwrap();
    let ph = w.cell_phases(&g3, WeightRule::CellCenter).unwrap();
    assert!(close(DiscreteProblem::new(&u3, &ph).energy_of(&u3).unwrap(), 2f64.sqrt(), 1e-14));
}

#[test]
fn dirichlet_minimizers() {
    let unit = Density::power_weight(Coefficient::constant(1.0, 1).unwrap(), 2.0).unwrap();
    let g = Grid::new(1, 33).unwrap();
    let sol = minimize(&unit, &g, &BoundaryData::interval(0.0, 1.0), &SolveOptions::default()).unwrap();
    // \int_{-1}^{1} (1/2)^2 = 1/2
    assert!(close(sol.energy, 0.5, 1e-12));
    let flat = minimize(&unit, &g, &BoundaryData::interval(0.7, 0.7), &SolveOptions::default()).unwrap();
    assert_eq!(flat.energy, 0.0);

    // n_nodes = 5, cell centres +-0.25, +-0.75, a = |x_c|^0.5, h = 1/2: the flux a u' is constant,
    // so E = (1/h) / sum(1/a_c) = 2 / (4 (1 + 1/sqrt 3)) = (3 - sqrt 3)/4
    let w = Density::power_weight(Coefficient::power_weight(0.5, &[0.0]).unwrap(), 2.0).unwrap();
    let sol = minimize(&w, &Grid::new(1, 5).unwrap(), &BoundaryData::interval(0.0, 1.0), &SolveOptions::default())
        .unwrap();
    assert!(close(sol.energy, 0.316_987_298_107_780_7, 1e-10));
}

#[test]
fn oracle_closed_form() {
    let prob = Oracle1DProblem::new(0.5, 2.0, 0.0, 1.0).unwrap();
    let ex = exact_minimizer(&prob);
    assert_eq!(ex.c, 0.25);
    assert!(close(ex.du(0.04), 0.25 / 0.2, 1e-15));
    assert!(close(ex.u(0.09), 0.5 + 0.15, 1e-15));
    let flat = exact_minimizer(&Oracle1DProblem::new(0.5, 2.0, 0.3, 0.3).unwrap());
    assert_eq!((flat.c, flat.u(0.4)), (0.0, 0.3));
    assert_eq!(blow_up_rate(0.5, 2.0).unwrap(), 0.5);
    assert_eq!(blow_up_rate(0.5, 3.0).unwrap(), 0.25);
}

#[test]
fn euler_spread_of_solved_and_affine_fields() {
    let prob = Oracle1DProblem::new(0.5, 2.0, 0.0, 1.0).unwrap();
    let d = prob.density().unwrap();
    let g = Grid::new(1, 513).unwrap();
    let sol = minimize(&d, &g, &prob.boundary(), &SolveOptions::default()).unwrap();
    assert!(euler_invariant_spread(&sol.field, &d, WeightRule::CellCenter).unwrap() < 0.01);
    let unit = Density::power_weight(Coefficient::constant(1.0, 1).unwrap(), 2.0).unwrap();
    let affine = DiscreteField::from_fn(&g, 1, |x, o| o[0] = 0.5 * x[0]).unwrap();
    assert_eq!(euler_invariant_spread(&affine, &unit, WeightRule::CellCenter).unwrap(), 0.0);
}

#[test]
fn k_constants() {
    let g = Grid::new(1, 16385).unwrap();
    let d = Density::power_weight(Coefficient::power_weight(0.5, &[0.0]).unwrap(), 2.0).unwrap();
    let pr = ExponentProfile::new(ext(2, 1), ext(2, 1), 1, ext(3, 2), ext(1, 1)).unwrap();
    // \int_{-1}^{1} |x|^{-1/2} dx = 4
    let k = compute_k(&d, &pr, &g, &Region::full(), KVariant::Main).unwrap();
    assert!(close(k.a_inv_s, 4.0, 0.02));
}

#[test]
fn lipschitz_lhs_of_affine_minimizer() {
    let d = Density::power_weight(Coefficient::constant(1.0, 2).unwrap(), 2.0).unwrap();
    let g = Grid::new(2, 9).unwrap();
    let sol = minimize(&d, &g, &BoundaryData::affine(0.0, &[0.3, 0.4]), &SolveOptions::default()).unwrap();
    let cf = certify(&sol.field, &d, WeightRule::CellCenter, CERTIFY_TOL).unwrap();
    let pr = ExponentProfile::from_f64(2.0, 2.0, 2, f64::INFINITY, f64::INFINITY).unwrap();
    let rep = check_lipschitz_estimate(&cf, &d, &pr, 1.0, 1.0).unwrap();
    assert!(close(rep.lhs, 0.5, 1e-12) && rep.ratio.is_finite());
}

#[test]
fn tent_sobolev_ratio() {
    // max |w|^2 = 1 against \int |w'|^2 = 2
    let g = Grid::new(1, 129).unwrap();
    let w = DiscreteField::from_fn(&g, 1, |x, o| o[0] = 1.0 - x[0].abs()).unwrap();
    let rep = weighted_sobolev_check(&w, &Coefficient::constant(1.0, 1).unwrap(), 2.0, f64::INFINITY).unwrap();
    assert!(close(rep.ratio, 0.5, 1e-13));
}

#[test]
fn hole_filling_constant_profile() {
    // h = B with A = 0 needs c >= 1/(1 - theta)
    let theta = 0.5;
    let samples: Vec<(f64, f64)> = (0..=10).map(|i| (0.5 + 0.05 * i as f64, 3.0)).collect();
    let rep = hole_filling_check(&samples, theta, 0.0, 3.0, 2.0);
    assert!(rep.hypothesis_ok && rep.conclusion_ok);
    assert!(hole_filling_constant(theta, 2.0) >= 1.0 / (1.0 - theta));
}
