use super::{Method, Solution, SolveOptions, SolverError, Termination, TraceRecord};
use crate::discretization::{CellIntegrand, DiscreteField, DiscreteProblem};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Newton direction with Levenberg shifts; `None` when the Hessian stays degenerate.
fn newton_direction<I: CellIntegrand + ?Sized>(prob: &DiscreteProblem<'_, I>, x: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let h = prob.hessian(x)?;
    let scale = (0..h.size()).map(|i| h.diagonal(i).abs()).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut hs = h.clone();
        if shift > 0.0 {
            hs.add_diagonal(shift);
        }
        if let Some(l) = hs.cholesky() {
            let d = l.cholesky_solve(g);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d.into_iter().map(|v| -v).collect());
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 100.0 };
    }
    None
}

pub fn minimize_integrand(
    integrand: &dyn CellIntegrand,
    template: &DiscreteField,
    seed: &DiscreteField,
    opts: &SolveOptions,
) -> Result<Solution, SolverError> {
    minimize_integrand_observed(integrand, template, seed, opts, &mut |_| {})
}

/// Descent on the free unknowns of `template`, starting at `seed`.
pub fn minimize_integrand_observed(
    integrand: &dyn CellIntegrand,
    template: &DiscreteField,
    seed: &DiscreteField,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(TraceRecord),
) -> Result<Solution, SolverError> {
    opts.validate()?;
    let prob = DiscreteProblem::new(template, integrand);
    let mut x = prob.unknowns(seed);
    let (mut e, mut g) = prob
        .energy_gradient(&x)
        .ok_or_else(|| SolverError::InfeasibleSeed("energy undefined at the seed".into()))?;
    let mut fallback = opts.method == Method::GradientBacktracking;
    let mut last_rel = f64::INFINITY;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut gd_step = 1.0;

    let finish = |x: &[f64], e: f64, gn: f64, it: usize, fallback: bool, termination| Solution {
        field: prob.assemble(x),
        energy: e,
        grad_norm: gn,
        iterations: it,
        method_used: if fallback { Method::GradientBacktracking } else { Method::NewtonTrust },
        fallback: fallback && opts.method == Method::NewtonTrust,
        termination,
    };

    for iter in 0..opts.max_iter {
        let gn = max_norm(&g);
        observer(TraceRecord { iter, energy: e, grad_norm: gn });
        if prob.n_unknowns() == 0 || gn <= opts.tol_grad && (iter == 0 || last_rel <= opts.tol_energy) {
            return Ok(finish(&x, e, gn, iter, fallback, Termination::Converged));
        }

        let mut dir = None;
        if !fallback {
            dir = newton_direction(&prob, &x, &g);
            if dir.is_none() {
                fallback = true;
            }
        }
        let (dir, t0) = match dir {
            Some(d) => (d, 1.0),
            None => {
                // Barzilai-Borwein scaling from the previous step.
                if let Some((px, pg)) = &prev {
                    let s: Vec<f64> = x.iter().zip(px).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    if sy > 0.0 {
                        gd_step = dot(&s, &s) / sy;
                    }
                } else {
                    gd_step = 1.0 / gn.max(1.0);
                }
                (g.iter().map(|v| -v).collect(), gd_step)
            }
        };
        let slope = dot(&g, &dir);
        if !(slope < 0.0) {
            if gn <= opts.tol_grad {
                return Ok(finish(&x, e, gn, iter, fallback, Termination::Stationary));
            }
            fallback = true;
            continue;
        }

        let mut t = t0;
        let mut accepted = None;
        let mut first_trial = None;
        for _ in 0..MAX_HALVINGS {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            if let Some((et, gt)) = prob.energy_gradient(&xt) {
                if et <= e + ARMIJO * t * slope {
                    accepted = Some((xt, et, gt, t));
                    break;
                }
                if first_trial.is_none() {
                    first_trial = Some((xt, et, gt, t));
                }
            }
            t *= 0.5;
        }
        if accepted.is_none() {
            // Armijo lost to roundoff: keep the step if it still reduces the gradient.
            if let Some((xt, et, gt, tt)) = first_trial {
                if max_norm(&gt) < gn {
                    accepted = Some((xt, et, gt, tt));
                }
            }
        }
        match accepted {
            Some((xt, et, gt, _)) => {
                last_rel = ((e - et) / e.abs().max(1e-300)).abs();
                prev = Some((std::mem::replace(&mut x, xt), std::mem::replace(&mut g, gt)));
                e = et;
            }
            None => {
                if gn <= opts.tol_grad {
                    return Ok(finish(&x, e, gn, iter, fallback, Termination::Stationary));
                }
                if !fallback {
                    fallback = true;
                    continue;
                }
                return Err(SolverError::NotConverged {
                    iterations: iter + 1,
                    grad_norm: gn,
                    energy: e,
                    last: Box::new(prob.assemble(&x)),
                });
            }
        }
    }
    let gn = max_norm(&g);
    if gn <= opts.tol_grad && last_rel <= opts.tol_energy {
        return Ok(finish(&x, e, gn, opts.max_iter, fallback, Termination::Converged));
    }
    Err(SolverError::NotConverged { iterations: opts.max_iter, grad_norm: gn, energy: e, last: Box::new(prob.assemble(&x)) })
}
