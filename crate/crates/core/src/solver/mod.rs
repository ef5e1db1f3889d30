//! Dirichlet minimization of the discrete energy over interior node values.

mod capped;
mod ladder;
mod newton;

pub use capped::{max_cell_gradient, minimize_capped, CappedSolution};
pub use ladder::{solve_ladder, LadderRung, LadderSchedule};
pub use newton::{minimize_integrand, minimize_integrand_observed};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{Density, DensityError};
use crate::discretization::{DiscreteField, DiscretizationError, Grid, WeightRule};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (gradient max-norm {grad_norm:.3e}, energy {energy:.12e})")]
    NotConverged { iterations: usize, grad_norm: f64, energy: f64, last: Box<DiscreteField> },
    #[error("seed lies outside the domain of the integrand: {0}")]
    InfeasibleSeed(String),
    #[error("gradient cap {cap} is not above the boundary slope {slope}")]
    Infeasible { slope: f64, cap: f64 },
    #[error("invalid solver options: {0}")]
    Options(String),
    #[error("invalid ladder schedule: {0}")]
    Schedule(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradientBacktracking,
    #[default]
    NewtonTrust,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum Seed {
    #[default]
    AffineInterpolant,
    Given(DiscreteField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Bound on the max-norm of the energy gradient.
    pub tol_grad: f64,
    /// Bound on the relative energy decrease of the last step.
    pub tol_energy: f64,
    pub max_iter: usize,
    pub seed: Seed,
    pub weight_rule: WeightRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::NewtonTrust,
            tol_grad: 1e-8,
            tol_energy: 1e-12,
            max_iter: 200,
            seed: Seed::AffineInterpolant,
            weight_rule: WeightRule::CellCenter,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol_grad > 0.0 && self.tol_energy > 0.0) {
            return Err(SolverError::Options("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(SolverError::Options("max_iter >= 1".into()));
        }
        Ok(())
    }

    pub fn with_rule(mut self, rule: WeightRule) -> Self {
        self.weight_rule = rule;
        self
    }
}

/// One component of the Dirichlet data, `offset + slope . x + curvature |x|^2 / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryComponent {
    pub offset: f64,
    pub slope: Vec<f64>,
    #[serde(default)]
    pub curvature: f64,
}

/// Dirichlet data, evaluated on the whole grid to produce the affine-interpolant seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryData {
    pub components: Vec<BoundaryComponent>,
}

impl BoundaryData {
    /// Scalar 1D data `u(-1) = a`, `u(1) = b`.
    pub fn interval(a: f64, b: f64) -> Self {
        Self { components: vec![BoundaryComponent { offset: 0.5 * (a + b), slope: vec![0.5 * (b - a)], curvature: 0.0 }] }
    }

    pub fn affine(offset: f64, slope: &[f64]) -> Self {
        Self { components: vec![BoundaryComponent { offset, slope: slope.to_vec(), curvature: 0.0 }] }
    }

    pub fn value(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in self.components.iter().zip(out.iter_mut()) {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            *o = c.offset + c.slope.iter().zip(x).map(|(s, v)| s * v).sum::<f64>() + 0.5 * c.curvature * r2;
        }
    }

    /// Lipschitz constant of the data on `[-1,1]^dim` (Frobenius norm of the gradient).
    pub fn slope(&self, dim: usize) -> f64 {
        let reach = (dim as f64).sqrt();
        self.components
            .iter()
            .map(|c| {
                let s = c.slope.iter().map(|v| v * v).sum::<f64>().sqrt();
                (s + c.curvature.abs() * reach).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn field(&self, grid: &Grid) -> Result<DiscreteField, SolverError> {
        if self.components.is_empty() || self.components.iter().any(|c| c.slope.len() != grid.dim()) {
            return Err(SolverError::Options(format!("boundary data must give {} slopes per component", grid.dim())));
        }
        Ok(DiscreteField::from_fn(grid, self.components.len(), |x, o| self.value(x, o))?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    /// Gradient already below tolerance and no descent step is possible in floating point.
    Stationary,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: DiscreteField,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub method_used: Method,
    /// Newton fell back to gradient steps because the Hessian stayed degenerate.
    pub fallback: bool,
    pub termination: Termination,
}

/// Progress record emitted once per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

fn seed_field(template: &DiscreteField, seed: &Seed) -> Result<DiscreteField, SolverError> {
    match seed {
        Seed::AffineInterpolant => Ok(template.clone()),
        Seed::Given(f) => {
            if f.grid() != template.grid() || f.components() != template.components() {
                return Err(SolverError::Options("seed field does not match the grid".into()));
            }
            let mut s = f.clone();
            for node in 0..template.grid().n_nodes() {
                if template.boundary_mask()[node] {
                    s.node_mut(node).copy_from_slice(template.node(node));
                }
            }
            Ok(s)
        }
    }
}

/// Minimizes `sum_cells vol f(x_cell, Du_cell)` with the given Dirichlet data.
pub fn minimize(d: &Density, grid: &Grid, boundary: &BoundaryData, opts: &SolveOptions) -> Result<Solution, SolverError> {
    minimize_observed(d, grid, boundary, opts, &mut |_| {})
}

pub fn minimize_observed(
    d: &Density,
    grid: &Grid,
    boundary: &BoundaryData,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(TraceRecord),
) -> Result<Solution, SolverError> {
    let phases = d.cell_phases(grid, opts.weight_rule)?;
    let template = boundary.field(grid)?;
    let seed = seed_field(&template, &opts.seed)?;
    minimize_integrand_observed(&phases, &template, &seed, opts, observer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Coefficient;

    #[test]
    fn dirichlet_energy_of_affine_minimizer() {
        let g = Grid::new(1, 9).unwrap();
        let d = Density::power_weight(Coefficient::constant(1.0, 1).unwrap(), 2.0).unwrap();
        let sol = minimize(&d, &g, &BoundaryData::interval(0.0, 1.0), &SolveOptions::default()).unwrap();
        assert!((sol.energy - 0.5).abs() < 1e-12);
        for node in 0..g.n_nodes() {
            let x = g.node_point(node)[0];
            assert!((sol.field.node(node)[0] - 0.5 * (x + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data_gives_constant_field() {
        let g = Grid::new(2, 7).unwrap();
        let a = Coefficient::power_weight(0.5, &[0.1, 0.2]).unwrap();
        let d = Density::double_phase(a, 2.0, Coefficient::constant(0.5, 2).unwrap(), 3.0).unwrap();
        let sol = minimize(&d, &g, &BoundaryData::affine(2.5, &[0.0, 0.0]), &SolveOptions::default()).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert!(sol.field.values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn gradient_method_agrees_with_newton() {
        let g = Grid::new(2, 9).unwrap();
        let a = Coefficient::power_weight(0.5, &[-1.25, 0.0]).unwrap();
        let d = Density::double_phase(a, 2.0, Coefficient::constant(0.2, 2).unwrap(), 2.6).unwrap();
        let bd = BoundaryData::affine(0.0, &[1.0, -0.5]);
        let newton = minimize(&d, &g, &bd, &SolveOptions::default()).unwrap();
        let opts = SolveOptions { method: Method::GradientBacktracking, max_iter: 20_000, ..Default::default() };
        let gd = minimize(&d, &g, &bd, &opts).unwrap();
        assert!((newton.energy - gd.energy).abs() < 1e-10 * newton.energy.abs());
        assert!(newton.field.sup_distance(&gd.field) < 1e-6);
    }

    #[test]
    fn exhausted_iterations_return_last_iterate() {
        let g = Grid::new(1, 33).unwrap();
        let d = Density::power_weight(Coefficient::power_weight(0.5, &[0.0]).unwrap(), 3.0).unwrap();
        let opts = SolveOptions { method: Method::GradientBacktracking, max_iter: 2, ..Default::default() };
        match minimize(&d, &g, &BoundaryData::interval(0.0, 1.0), &opts) {
            Err(SolverError::NotConverged { iterations, last, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.grid(), &g);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
