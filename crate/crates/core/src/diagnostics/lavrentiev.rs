use serde::Serialize;

use super::DiagnosticsError;
use crate::density::Density;
use crate::discretization::Grid;
use crate::solver::{minimize, minimize_capped, BoundaryData, SolveOptions, SolverError};

/// Relative excess of the capped over the unrestricted infimum that counts as a gap.
pub const GAP_TOLERANCE: f64 = 5e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CappedRow {
    pub cap: f64,
    pub energy: f64,
    pub max_gradient: f64,
    pub rel_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LavrentievRow {
    pub n_nodes: usize,
    pub unrestricted: f64,
    pub capped: Vec<CappedRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LavrentievReport {
    pub rows: Vec<LavrentievRow>,
    /// Set when the largest cap stays more than `GAP_TOLERANCE` above the unrestricted infimum on every grid.
    pub gap_flag: bool,
}

/// Compares unrestricted discrete infima with infima under `max |Du| <= M` on each grid.
pub fn lavrentiev_probe(
    d: &Density,
    grids: &[Grid],
    boundary: &BoundaryData,
    caps: &[f64],
    opts: &SolveOptions,
) -> Result<LavrentievReport, DiagnosticsError> {
    if grids.is_empty() || caps.is_empty() {
        return Err(DiagnosticsError::Precondition("need at least one grid and one cap".into()));
    }
    let mut caps = caps.to_vec();
    caps.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(grids.len());
    for grid in grids {
        let slope = boundary.slope(grid.dim());
        if let Some(&m) = caps.iter().find(|&&m| !(m > slope)) {
            return Err(SolverError::Infeasible { slope, cap: m }.into());
        }
        let unrestricted = minimize(d, grid, boundary, opts)?.energy;
        let mut capped = Vec::with_capacity(caps.len());
        for &cap in &caps {
            let sol = minimize_capped(d, grid, boundary, cap, opts)?;
            let rel_gap = (sol.energy - unrestricted) / unrestricted.abs().max(f64::MIN_POSITIVE);
            capped.push(CappedRow { cap, energy: sol.energy, max_gradient: sol.max_gradient, rel_gap });
        }
        rows.push(LavrentievRow { n_nodes: grid.n_axis(), unrestricted, capped });
    }
    let gap_flag = rows.iter().all(|r| r.capped.last().is_some_and(|c| c.rel_gap > GAP_TOLERANCE));
    Ok(LavrentievReport { rows, gap_flag })
}
