use serde::Serialize;

/// Constant of the iteration lemma: with `tau = (2 theta / (1 + theta))^{1/beta}`,
/// `c = (1 - tau)^{-beta} / (1 - theta tau^{-beta})`.
pub fn hole_filling_constant(theta: f64, beta: f64) -> f64 {
    let tau = (2.0 * theta / (1.0 + theta)).powf(1.0 / beta);
    (1.0 - tau).powf(-beta) / (1.0 - theta * tau.powf(-beta))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoleFillingReport {
    pub hypothesis_ok: bool,
    /// First sampled pair `(s, t)` with `h(s) > theta h(t) + A/(t-s)^beta + B`.
    pub hypothesis_violation: Option<(f64, f64)>,
    pub constant: f64,
    /// `(r, h(r), bound)` per sample point; checked only when the hypothesis holds.
    pub conclusion_ok: bool,
    pub worst_margin: f64,
}

/// `samples` are `(t, h(t))` on `[r, R0]`, with `R0` the largest abscissa.
pub fn hole_filling_check(samples: &[(f64, f64)], theta: f64, a: f64, b: f64, beta: f64) -> HoleFillingReport {
    assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
    assert!(beta > 0.0 && a >= 0.0 && b >= 0.0);
    let constant = hole_filling_constant(theta, beta);
    let r0 = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let mut violation = None;
    'outer: for &(s, hs) in samples {
        for &(t, ht) in samples {
            if s < t && hs > theta * ht + a / (t - s).powf(beta) + b {
                violation = Some((s, t));
                break 'outer;
            }
        }
    }
    let mut worst_margin = f64::INFINITY;
    if violation.is_none() {
        for &(r, hr) in samples.iter().filter(|s| s.0 < r0) {
            let bound = constant * a / (r0 - r).powf(beta) + constant * b;
            worst_margin = worst_margin.min(bound - hr);
        }
    }
    HoleFillingReport {
        hypothesis_ok: violation.is_none(),
        hypothesis_violation: violation,
        constant,
        conclusion_ok: violation.is_none() && worst_margin >= 0.0,
        worst_margin,
    }
}
