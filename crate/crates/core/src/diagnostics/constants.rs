use serde::Serialize;

use super::DiagnosticsError;
use crate::density::{Coefficient, Density};
use crate::discretization::{Grid, Region};
use crate::exponents::ExponentProfile;
use crate::numerics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KVariant {
    /// `1 + ||1/a||_s ||k||_r^2`.
    Main,
    /// `1 + ||1/a||_s ||k+b||_r^2 + ||a||_{rs/(2s+r)}`.
    Apriori,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KConstant {
    pub variant: KVariant,
    pub value: f64,
    pub a_inv_s: f64,
    /// `||k||_r` (main) or `||k+b||_r` (apriori).
    pub k_r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_norm: Option<f64>,
}

/// `(sum vol |f|^t)^{1/t}` over cell centres, or the max for `t = inf`.
pub(crate) fn cell_norm(grid: &Grid, cells: &[usize], t: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let vals = cells.iter().map(|&c| f(&grid.cell_center(c)[..grid.dim()]).abs());
    if t.is_infinite() {
        return vals.fold(0.0, f64::max);
    }
    let vol = grid.cell_volume();
    numerics::sum(vals.map(|v| vol * v.powf(t))).powf(1.0 / t)
}

fn touches(c: &Coefficient, region: &Region) -> bool {
    c.degenerate_points().iter().any(|p| region.contains(p))
}

fn require_below(factor: &str, exponent: f64, limit: f64, relevant: bool) -> Result<(), DiagnosticsError> {
    if relevant && !(limit.is_infinite() || exponent < limit) {
        return Err(DiagnosticsError::DivergentNorm { factor: factor.into(), exponent, limit });
    }
    Ok(())
}

/// Midpoint-rule evaluation of the constants over `region`; divergence is decided
/// from the coefficient metadata before any quadrature.
pub fn compute_k(
    d: &Density,
    profile: &ExponentProfile,
    grid: &Grid,
    region: &Region,
    variant: KVariant,
) -> Result<KConstant, DiagnosticsError> {
    let (r, s) = (profile.r().to_f64(), profile.s().to_f64());
    let a = d.a();
    let near = touches(a, region) || d.b().is_some_and(|b| touches(b, region));
    require_below("1/a in L^s", s, a.s_exponent(), touches(a, region))?;
    require_below("k in L^r", r, d.k_r_exponent(), near)?;
    let cells = region.cells(grid);
    let a_inv_s = cell_norm(grid, &cells, s, |x| 1.0 / a.value(x).unwrap_or(f64::NAN));
    let k = |x: &[f64]| d.k_value(x).unwrap_or(f64::INFINITY);
    match variant {
        KVariant::Main => {
            let k_r = cell_norm(grid, &cells, r, k);
            Ok(KConstant { variant, value: 1.0 + a_inv_s * k_r * k_r, a_inv_s, k_r, a_norm: None })
        }
        KVariant::Apriori => {
            let b = d.b();
            let kb = |x: &[f64]| k(x) + b.map_or(0.0, |b| b.value(x).unwrap_or(f64::NAN));
            let k_r = cell_norm(grid, &cells, r, kb);
            // 1 / (rs/(2s+r)) = 2/r + 1/s
            let inv = 2.0 / r + 1.0 / s;
            let t = if inv == 0.0 { f64::INFINITY } else { 1.0 / inv };
            let a_norm = cell_norm(grid, &cells, t, |x| a.value(x).unwrap_or(f64::NAN));
            Ok(KConstant { variant, value: 1.0 + a_inv_s * k_r * k_r + a_norm, a_inv_s, k_r, a_norm: Some(a_norm) })
        }
    }
}
