use super::{minimize_integrand, seed_field, BoundaryData, SolveOptions, SolverError};
use crate::density::Density;
use crate::discretization::{discrete_gradient, CellIntegrand, CellPhases, DiscreteField, DiscreteProblem, Grid, Radial};

/// Log-barrier for `|Du| < M`: adds `-mu log(1 - t^2/M^2)` per unit volume.
struct Barrier<'a> {
    base: &'a CellPhases,
    mu: f64,
    m2: f64,
}

impl CellIntegrand for Barrier<'_> {
    fn radial(&self, cell: usize, t2: f64) -> Option<Radial> {
        if !(t2 < self.m2) {
            return None;
        }
        let mut r = self.base.radial(cell, t2)?;
        let gap = self.m2 - t2;
        r.g -= self.mu * (gap / self.m2).ln();
        r.flux += 2.0 * self.mu / gap;
        r.shear += 4.0 * self.mu / (gap * gap);
        Some(r)
    }
}

#[derive(Clone, Debug)]
pub struct CappedSolution {
    pub field: DiscreteField,
    /// Energy of the original integrand, barrier excluded.
    pub energy: f64,
    pub cap: f64,
    pub max_gradient: f64,
    pub final_mu: f64,
}

const MU_START: f64 = 1e-2;
const MU_END: f64 = 1e-10;
const INNER_ACCEPT: f64 = 1e-5;

/// Minimizes over fields with `max |Du| <= M` by a decreasing log-barrier path.
pub fn minimize_capped(
    d: &Density,
    grid: &Grid,
    boundary: &BoundaryData,
    cap: f64,
    opts: &SolveOptions,
) -> Result<CappedSolution, SolverError> {
    let slope = boundary.slope(grid.dim());
    if !(cap > slope) {
        return Err(SolverError::Infeasible { slope, cap });
    }
    let phases = d.cell_phases(grid, opts.weight_rule)?;
    let template = boundary.field(grid)?;
    let mut field = seed_field(&template, &opts.seed)?;
    let seed_max = max_cell_gradient(&field);
    if !(seed_max < cap) {
        return Err(SolverError::InfeasibleSeed(format!("seed gradient {seed_max} >= cap {cap}")));
    }
    let mut mu = MU_START;
    loop {
        let barrier = Barrier { base: &phases, mu, m2: cap * cap };
        // Near an active cap the barrier Hessian scales like 1/mu and the gradient
        // carries roundoff of the same order; a centred iterate is enough to continue.
        field = match minimize_integrand(&barrier, &template, &field, opts) {
            Ok(sol) => sol.field,
            Err(SolverError::NotConverged { grad_norm, last, .. }) if grad_norm < INNER_ACCEPT => *last,
            Err(e) => return Err(e),
        };
        if mu <= MU_END {
            break;
        }
        mu = (mu * 0.1).max(MU_END);
    }
    let energy = DiscreteProblem::new(&template, &phases)
        .energy_of(&field)
        .expect("phase energy is finite");
    Ok(CappedSolution { max_gradient: max_cell_gradient(&field), field, energy, cap, final_mu: mu })
}

pub fn max_cell_gradient(field: &DiscreteField) -> f64 {
    let g = discrete_gradient(field);
    (0..field.grid().n_cells()).map(|c| g.cell_norm2(c).sqrt()).fold(0.0, f64::max)
}
