use serde::{Deserialize, Serialize};

use super::{minimize, BoundaryData, Seed, SolveOptions, SolverError};
use crate::density::Density;
use crate::discretization::{DiscreteField, DiscreteProblem, Grid};

/// Regularization parameters `h_1 < h_2 < ...` and the exponent `ps/(s+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSchedule {
    #[serde(default = "default_h_values")]
    pub h_values: Vec<f64>,
    pub p: f64,
    #[serde(with = "crate::config::ext_f64")]
    pub s: f64,
}

fn default_h_values() -> Vec<f64> {
    vec![1e1, 1e2, 1e3, 1e4]
}

impl LadderSchedule {
    pub fn new(h_values: Vec<f64>, p: f64, s: f64) -> Result<Self, SolverError> {
        let sch = Self { h_values, p, s };
        sch.validate()?;
        Ok(sch)
    }

    pub fn sigma(&self) -> f64 {
        Density::sigma_of(self.p, self.s)
    }

    /// Requires increasing positive `h` and `ps/(s+1) >= 2` so every rung keeps a
    /// nondegenerate quadratic part for the Newton solver.
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.h_values.is_empty() || self.h_values.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(SolverError::Schedule("h values must be finite and positive".into()));
        }
        if self.h_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SolverError::Schedule("h values must be strictly increasing".into()));
        }
        if !(self.s >= 1.0) {
            return Err(SolverError::Schedule("s >= 1".into()));
        }
        if !(self.sigma() >= 2.0) {
            return Err(SolverError::Schedule(format!("ps/(s+1) = {} < 2", self.sigma())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LadderRung {
    pub h: f64,
    pub field: Option<DiscreteField>,
    /// `F_h(v_h)`.
    pub energy: f64,
    /// `F(v_h)` for the unregularized density.
    pub base_energy: f64,
    /// `F_h` at the affine candidate.
    pub candidate_energy: f64,
    pub comparison_ok: bool,
    pub error: Option<String>,
}

/// Minimizes `f_h = f + (1/h)(1+|xi|^2)^{ps/(2(s+1))}` for each `h`, warm-starting
/// each rung from the previous minimizer. A failed rung is recorded and the next
/// one restarts from the affine seed.
pub fn solve_ladder(
    d: &Density,
    grid: &Grid,
    boundary: &BoundaryData,
    schedule: &LadderSchedule,
    opts: &SolveOptions,
) -> Result<Vec<LadderRung>, SolverError> {
    schedule.validate()?;
    if (schedule.p - d.p()).abs() > 1e-12 {
        return Err(SolverError::Schedule(format!("schedule p {} differs from density p {}", schedule.p, d.p())));
    }
    let template = boundary.field(grid)?;
    let base_phases = d.cell_phases(grid, opts.weight_rule)?;
    let mut seed = opts.seed.clone();
    let mut rungs = Vec::with_capacity(schedule.h_values.len());
    for &h in &schedule.h_values {
        let dh = Density::regularized(d.clone(), h, schedule.s)?;
        let phases = dh.cell_phases(grid, opts.weight_rule)?;
        let prob = DiscreteProblem::new(&template, &phases);
        let candidate_energy = prob.energy_of(&template).unwrap_or(f64::NAN);
        let rung_opts = SolveOptions { seed: seed.clone(), ..opts.clone() };
        match minimize(&dh, grid, boundary, &rung_opts) {
            Ok(sol) => {
                let base_energy = DiscreteProblem::new(&template, &base_phases)
                    .energy_of(&sol.field)
                    .unwrap_or(f64::NAN);
                let tol = 1e-9 * candidate_energy.abs().max(1.0);
                rungs.push(LadderRung {
                    h,
                    energy: sol.energy,
                    base_energy,
                    candidate_energy,
                    comparison_ok: sol.energy <= candidate_energy + tol,
                    error: None,
                    field: Some(sol.field.clone()),
                });
                seed = Seed::Given(sol.field);
            }
            Err(err) => {
                rungs.push(LadderRung {
                    h,
                    field: None,
                    energy: f64::NAN,
                    base_energy: f64::NAN,
                    candidate_energy,
                    comparison_ok: false,
                    error: Some(err.to_string()),
                });
                seed = Seed::AffineInterpolant;
            }
        }
    }
    Ok(rungs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Coefficient;

    #[test]
    fn schedule_validation() {
        assert!(LadderSchedule::new(vec![10.0, 100.0], 2.0, f64::INFINITY).is_ok());
        assert!(LadderSchedule::new(vec![100.0, 10.0], 2.0, f64::INFINITY).is_err());
        assert!(LadderSchedule::new(vec![10.0], 2.0, 3.0).is_err());
        assert!(LadderSchedule::new(vec![10.0], 3.0, 2.0).is_ok());
    }

    #[test]
    fn elliptic_rungs_are_close_and_monotone() {
        let g = Grid::new(2, 9).unwrap();
        let a = Coefficient::power_weight(0.5, &[-2.5, 0.0]).unwrap();
        let d = Density::double_phase(a, 2.0, Coefficient::constant(0.2, 2).unwrap(), 2.4).unwrap();
        let bd = BoundaryData::affine(0.0, &[1.0, 0.3]);
        let sch = LadderSchedule::new(vec![1e1, 1e2, 1e3, 1e4], 2.0, f64::INFINITY).unwrap();
        let rungs = solve_ladder(&d, &g, &bd, &sch, &SolveOptions::default()).unwrap();
        for w in rungs.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-10);
        }
        assert!(rungs.iter().all(|r| r.comparison_ok));
        let f3 = rungs[2].field.as_ref().unwrap();
        let f4 = rungs[3].field.as_ref().unwrap();
        assert!(f3.sup_distance(f4) < 1e-3);
    }
}
