use serde::Serialize;

use super::{CertifiedField, DiagnosticsError};
use crate::discretization::{discrete_gradient, Region};
use crate::exponents::{moser_ladder, ExponentProfile};
use crate::numerics;

/// Relative slack allowed between consecutive ladder norms before a rung counts as a decrease.
const MONOTONE_SLACK: f64 = 1e-12;
/// Rungs are added until the exponent reaches this value when no explicit count is given.
const AUTO_TARGET: f64 = 1e3;
const AUTO_LIMIT: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoserReport {
    pub exponents: Vec<f64>,
    pub norms: Vec<f64>,
    /// `max (1+|Du|^2)^{1/2}` over the region.
    pub sup: f64,
    pub monotone: bool,
    /// Rungs `i` with `norms[i] < norms[i-1]` beyond roundoff.
    pub violations: Vec<usize>,
    /// `norms.last() / sup`.
    pub final_ratio: f64,
}

/// Mean-normalized `(avg (1+t2)^{p/2})^{1/p}` for each exponent, evaluated as
/// `exp(log_mean_exp(p/2 ln(1+t2)) / p)` so that no power is ever formed.
pub fn moser_norms(t2: &[f64], exponents: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = t2.iter().map(|v| v.ln_1p()).collect();
    exponents
        .iter()
        .map(|&p| {
            let scaled: Vec<f64> = logs.iter().map(|l| 0.5 * p * l).collect();
            (numerics::log_mean_exp(&scaled) / p).exp()
        })
        .collect()
}

/// Ladder norms of `(1+|Du|^2)^{1/2}` over the cells of `region`.
/// `i_max = None` extends the ladder until `p_i >= 1000`.
pub fn moser_norm_ladder_check(
    cf: &CertifiedField,
    profile: &ExponentProfile,
    region: &Region,
    i_max: Option<usize>,
) -> Result<MoserReport, DiagnosticsError> {
    let exponents = match i_max {
        Some(i) => moser_ladder(profile, i)?.exponents,
        None => {
            let first = moser_ladder(profile, 0)?;
            let steps = if first.p0 >= AUTO_TARGET {
                0
            } else {
                ((AUTO_TARGET / first.p0).ln() / first.ratio.ln()).ceil() as usize
            };
            moser_ladder(profile, steps.min(AUTO_LIMIT))?.exponents
        }
    };
    let grid = cf.field.grid();
    let grad = discrete_gradient(&cf.field);
    let t2: Vec<f64> = region.cells(grid).into_iter().map(|c| grad.cell_norm2(c)).collect();
    if t2.is_empty() {
        return Err(DiagnosticsError::Precondition("region contains no cells".into()));
    }
    let sup = (1.0 + t2.iter().fold(0.0f64, |m, v| m.max(*v))).sqrt();
    let norms = moser_norms(&t2, &exponents);
    let violations: Vec<usize> =
        (1..norms.len()).filter(|&i| norms[i] < norms[i - 1] * (1.0 - MONOTONE_SLACK)).collect();
    let final_ratio = norms.last().copied().unwrap_or(f64::NAN) / sup;
    Ok(MoserReport { exponents, norms, sup, monotone: violations.is_empty(), violations, final_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gradient_norms_are_constant() {
        let norms = moser_norms(&[3.0; 10], &[2.0, 20.0, 2000.0, 2e6]);
        for v in norms {
            assert!((v - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let t2 = [1e6, 1.0, 0.0, 1e-3];
        let norms = moser_norms(&t2, &[2.0, 1e3, 1e5]);
        assert!(norms.iter().all(|v| v.is_finite()));
        assert!(norms.windows(2).all(|w| w[1] >= w[0]));
        let sup = (1.0f64 + 1e6).sqrt();
        assert!((norms[2] / sup - 1.0).abs() < 1e-4);
    }
}
