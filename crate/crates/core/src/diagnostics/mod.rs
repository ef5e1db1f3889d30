//! Both sides of the quantitative regularity estimates, evaluated on solved fields.

mod constants;
mod estimates;
mod hole_filling;
mod lavrentiev;
mod moser;
mod sobolev;

pub use constants::{compute_k, KConstant, KVariant};
pub use estimates::{check_higher_diff_estimate, check_lipschitz_estimate, check_second_derivative_estimate};
pub use hole_filling::{hole_filling_check, hole_filling_constant, HoleFillingReport};
pub use lavrentiev::{lavrentiev_probe, CappedRow, LavrentievReport, LavrentievRow, GAP_TOLERANCE};
pub use moser::{moser_norm_ladder_check, moser_norms, MoserReport};
pub use sobolev::{sobolev_conjugate, weighted_sobolev_check};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::density::{Density, DensityError};
use crate::discretization::{DiscreteField, DiscreteProblem, DiscretizationError, WeightRule};
use crate::exponents::{ExponentError, GapClass};
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("divergent norm: {factor} needs exponent {exponent} below the integrability limit {limit}")]
    DivergentNorm { factor: String, exponent: f64, limit: f64 },
    #[error("field is not a certified minimizer (gradient max-norm {grad_norm:.3e} > {tol:.1e})")]
    Uncertified { grad_norm: f64, tol: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateId {
    Fin,
    Hdfin,
    Hd6,
    Sob,
    Ladder,
    Lavrentiev,
}

/// Concentric sub-squares standing in for `B_{R0}` and the inner ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Regions {
    pub outer: f64,
    pub inner: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate_id: EstimateId,
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_components: BTreeMap<String, f64>,
    pub ratio: f64,
    pub regions: Regions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_class: Option<GapClass>,
}

/// A field whose discrete energy gradient vanishes to `grad_norm`.
#[derive(Clone, Debug)]
pub struct CertifiedField {
    pub field: DiscreteField,
    pub rule: WeightRule,
    pub grad_norm: f64,
}

/// Default certification threshold; the solver's stopping tolerance is 1e-8.
pub const CERTIFY_TOL: f64 = 1e-6;

/// Checks that `field` is stationary for the discrete energy of `d` on its interior nodes.
pub fn certify(field: &DiscreteField, d: &Density, rule: WeightRule, tol: f64) -> Result<CertifiedField, DiagnosticsError> {
    let phases = d.cell_phases(field.grid(), rule)?;
    let prob = DiscreteProblem::new(field, &phases);
    let (_, g) = prob
        .energy_gradient(&prob.unknowns(field))
        .ok_or_else(|| DiagnosticsError::Precondition("energy undefined".into()))?;
    let grad_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(grad_norm <= tol) {
        return Err(DiagnosticsError::Uncertified { grad_norm, tol });
    }
    Ok(CertifiedField { field: field.clone(), rule, grad_norm })
}
