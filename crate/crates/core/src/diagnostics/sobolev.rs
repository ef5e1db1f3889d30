use std::collections::BTreeMap;

use super::constants::cell_norm;
use super::{DiagnosticsError, EstimateId, EstimateReport, Regions};
use crate::density::{Coefficient, Density};
use crate::discretization::{discrete_gradient, DiscreteField};
use crate::numerics;

/// `n sigma / (n - sigma)` below the dimension; infinite when `n = 1` or `sigma > n`.
pub fn sobolev_conjugate(n: u32, sigma: f64) -> Result<f64, DiagnosticsError> {
    let nf = f64::from(n);
    if !(sigma >= 1.0) {
        return Err(DiagnosticsError::Precondition(format!("sigma = {sigma} must be at least 1")));
    }
    if n == 1 || sigma > nf {
        Ok(f64::INFINITY)
    } else if sigma == nf {
        Err(DiagnosticsError::Precondition(format!("borderline sigma = n = {n} has no finite conjugate embedding into L^inf")))
    } else {
        Ok(nf * sigma / (nf - sigma))
    }
}

/// Both sides of the weighted Sobolev inequality with unit constant.
pub fn weighted_sobolev_check(w: &DiscreteField, lam: &Coefficient, p: f64, s: f64) -> Result<EstimateReport, DiagnosticsError> {
    if !w.vanishes_on_boundary() {
        return Err(DiagnosticsError::Precondition("w must vanish on the boundary".into()));
    }
    if !(p >= 2.0 && s >= 1.0) {
        return Err(DiagnosticsError::Precondition(format!("need p >= 2 and s >= 1, got p = {p}, s = {s}")));
    }
    let grid = w.grid();
    let dim = grid.dim();
    let sigma = Density::sigma_of(p, s);
    let sigma_star = sobolev_conjugate(dim as u32, sigma)?;

    let node_abs: Vec<f64> = (0..grid.n_nodes()).map(|i| w.node(i).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let lhs = if sigma_star.is_infinite() {
        node_abs.iter().fold(0.0f64, |m, v| m.max(*v)).powf(p)
    } else {
        let vol = grid.node_volume();
        numerics::sum(node_abs.iter().map(|v| vol * v.powf(sigma_star))).powf(p / sigma_star)
    };

    let cells: Vec<usize> = (0..grid.n_cells()).collect();
    let lam_inv = cell_norm(grid, &cells, s, |x| lam.value(x).map_or(f64::INFINITY, |v| 1.0 / v));
    if !lam_inv.is_finite() {
        return Err(DiagnosticsError::DivergentNorm { factor: "lambda^-1".into(), exponent: s, limit: lam.s_exponent() });
    }
    let grad = discrete_gradient(w);
    let vol = grid.cell_volume();
    let mut lam_err = None;
    let weighted = numerics::sum(cells.iter().map(|&c| {
        let x = grid.cell_center(c);
        let l = lam.value(&x[..dim]).unwrap_or_else(|e| {
            lam_err = Some(e);
            0.0
        });
        vol * l * grad.cell_norm2(c).powf(0.5 * p)
    }));
    if let Some(e) = lam_err {
        return Err(e.into());
    }
    let rhs = lam_inv * weighted;
    let mut comps = BTreeMap::new();
    comps.insert("lambda_inv_norm".into(), lam_inv);
    comps.insert("weighted_dirichlet".into(), weighted);
    comps.insert("sigma".into(), sigma);
    comps.insert("sigma_star".into(), sigma_star);
    Ok(EstimateReport {
        estimate_id: EstimateId::Sob,
        lhs,
        rhs,
        rhs_components: comps,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        regions: Regions { outer: 1.0, inner: 1.0 },
        profile_class: None,
    })
}
