use std::collections::BTreeMap;

use super::constants::cell_norm;
use super::{compute_k, CertifiedField, DiagnosticsError, EstimateId, EstimateReport, KVariant, Regions};
use crate::density::{v_p_map, Density};
use crate::discretization::{discrete_gradient, discrete_second_differences, CellIntegrand, Region};
use crate::exponents::ExponentProfile;
use crate::numerics;

fn energy_integral(cf: &CertifiedField, d: &Density, region: &Region) -> Result<f64, DiagnosticsError> {
    let grid = cf.field.grid();
    let phases = d.cell_phases(grid, cf.rule)?;
    let grad = discrete_gradient(&cf.field);
    let vol = grid.cell_volume();
    Ok(numerics::sum(region.cells(grid).into_iter().map(|c| {
        let g = phases.radial(c, grad.cell_norm2(c)).expect("phases are total").g;
        vol * (1.0 + g)
    })))
}

/// `K^theta (\int_{R0} (1+f))^theta` with its components.
fn fin_rhs(
    cf: &CertifiedField,
    d: &Density,
    profile: &ExponentProfile,
    r0: f64,
    theta: f64,
) -> Result<(f64, BTreeMap<String, f64>), DiagnosticsError> {
    let outer = Region::new(r0);
    let k = compute_k(d, profile, cf.field.grid(), &outer, KVariant::Main)?;
    let e = energy_integral(cf, d, &outer)?;
    let mut comps = BTreeMap::new();
    comps.insert("K_main".into(), k.value);
    comps.insert("a_inv_s".into(), k.a_inv_s);
    comps.insert("k_r".into(), k.k_r);
    comps.insert("energy_integral".into(), e);
    comps.insert("theta".into(), theta);
    Ok(((k.value * e).powf(theta), comps))
}

/// Sup of `|Du|` on the inner square against `(K (\int (1+f)))^theta`. Never pass/fail.
pub fn check_lipschitz_estimate(
    cf: &CertifiedField,
    d: &Density,
    profile: &ExponentProfile,
    r0: f64,
    theta: f64,
) -> Result<EstimateReport, DiagnosticsError> {
    let grid = cf.field.grid();
    let inner = Region::new(0.5 * r0);
    let grad = discrete_gradient(&cf.field);
    let lhs = inner.cells(grid).into_iter().map(|c| grad.cell_norm2(c).sqrt()).fold(0.0, f64::max);
    let (rhs, rhs_components) = fin_rhs(cf, d, profile, r0, theta)?;
    Ok(EstimateReport {
        estimate_id: EstimateId::Fin,
        lhs,
        rhs,
        rhs_components,
        ratio: lhs / rhs,
        regions: Regions { outer: r0, inner: 0.5 * r0 },
        profile_class: Some(profile.classify()),
    })
}

/// `\int_{inner} a (1+|Du|^2)^{(p-2)/2} |D^2u|^2` from nodal central differences.
pub fn check_second_derivative_estimate(
    cf: &CertifiedField,
    d: &Density,
    profile: &ExponentProfile,
    r0: f64,
    theta: f64,
) -> Result<EstimateReport, DiagnosticsError> {
    let field = &cf.field;
    let grid = field.grid();
    let (dim, nc, h) = (grid.dim(), field.components(), grid.spacing());
    let d2 = discrete_second_differences(field);
    let window = d2.valid.intersect(&Region::new(0.5 * r0).node_box(grid));
    let arr = field.as_array();
    let vol = grid.node_volume();
    let mut terms = Vec::new();
    for ij in window.iter() {
        let x = grid.node_point(grid.node_index(ij));
        let a = d.a().value(&x[..dim])?;
        let mut du2 = 0.0;
        for axis in 0..dim {
            let (mut plus, mut minus) = (ij, ij);
            plus[axis] += 1;
            minus[axis] -= 1;
            for alpha in 0..nc {
                let g = (arr.at(plus)[alpha] - arr.at(minus)[alpha]) / (2.0 * h);
                du2 += g * g;
            }
        }
        let hess2: f64 = d2.at(ij).iter().map(|v| v * v).sum();
        terms.push(vol * a * (1.0 + du2).powf(0.5 * (d.p() - 2.0)) * hess2);
    }
    let lhs = numerics::sum(terms);
    let (rhs, rhs_components) = fin_rhs(cf, d, profile, r0, theta)?;
    Ok(EstimateReport {
        estimate_id: EstimateId::Hdfin,
        lhs,
        rhs,
        rhs_components,
        ratio: lhs / rhs,
        regions: Regions { outer: r0, inner: 0.5 * r0 },
        profile_class: Some(profile.classify()),
    })
}

/// `\int_{B_rho} |D V_p(Du)|^2` against the right side of the higher
/// differentiability bound with unit constant, for radii `rho < R` and `2R <= 1`.
pub fn check_higher_diff_estimate(
    cf: &CertifiedField,
    d: &Density,
    rho: f64,
    big_r: f64,
) -> Result<EstimateReport, DiagnosticsError> {
    let nu = d.a().inf();
    if !(nu > 0.0) {
        return Err(DiagnosticsError::Precondition("a must be bounded below by a positive constant".into()));
    }
    if !(rho > 0.0 && rho < big_r && 2.0 * big_r <= 1.0 + 1e-12) {
        return Err(DiagnosticsError::Precondition("radii must satisfy 0 < rho < R <= 1/2".into()));
    }
    let field = &cf.field;
    let grid = field.grid();
    let (dim, h) = (grid.dim(), grid.spacing());
    let (p, q) = (d.p(), d.q());
    let grad = discrete_gradient(field);
    let inner = Region::new(rho);
    let vcells: Vec<Vec<f64>> = (0..grid.n_cells()).map(|c| v_p_map(grad.cell(c), p)).collect();
    let vol = grid.cell_volume();
    let mut terms = Vec::new();
    for c in inner.cells(grid) {
        let ij = grid.cell_multi(c);
        for axis in 0..dim {
            let mut nb = ij;
            nb[axis] += 1;
            if nb[axis] >= grid.n_axis() - 1 {
                continue;
            }
            let cn = grid.cell_index(nb);
            if !inner.contains(&grid.cell_center(cn)[..dim]) {
                continue;
            }
            let diff: f64 = vcells[c].iter().zip(&vcells[cn]).map(|(a, b)| (a - b) * (a - b)).sum();
            terms.push(vol * diff / (h * h));
        }
    }
    let lhs = numerics::sum(terms);

    let all: Vec<usize> = Region::new(2.0 * big_r).cells(grid);
    let mid: Vec<usize> = Region::new(big_r).cells(grid);
    let du = |c: usize| grad.cell_norm2(c).sqrt();
    let sup = all.iter().map(|&c| 1.0 + du(c)).fold(1.0, f64::max);
    let du2: f64 = numerics::sum(all.iter().map(|&c| vol * du(c).powi(2)));
    let dup = numerics::sum(all.iter().map(|&c| vol * du(c).powf(p))).powf(1.0 / p);
    let k = |x: &[f64]| d.k_value(x).unwrap_or(f64::INFINITY);
    let k2 = cell_norm(grid, &mid, 2.0, k).powi(2);
    let kp = cell_norm(grid, &mid, p / (p - 1.0), k);
    let t1 = sup.powf(2.0 * q - p) * du2 / (big_r - rho).powi(2);
    let t2 = sup.powf(2.0 * q - p) * k2;
    let t3 = sup.powf(q - 1.0) * kp * dup;
    let rhs = t1 + t2 + t3;
    let mut comps = BTreeMap::new();
    comps.insert("sup_one_plus_du".into(), sup);
    comps.insert("int_du2".into(), du2);
    comps.insert("int_k2".into(), k2);
    comps.insert("k_norm_p_conj".into(), kp);
    comps.insert("du_norm_p".into(), dup);
    comps.insert("rho".into(), rho);
    comps.insert("R".into(), big_r);
    Ok(EstimateReport {
        estimate_id: EstimateId::Hd6,
        lhs,
        rhs,
        rhs_components: comps,
        ratio: lhs / rhs,
        regions: Regions { outer: 2.0 * big_r, inner: rho },
        profile_class: None,
    })
}
