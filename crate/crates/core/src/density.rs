//! Radial energy densities `f(x, xi) = g(x, |xi|)` built from normalized phases
//! `c(x) ((1+|xi|^2)^{e/2} - 1)`, their derivatives, and sampled structure checks.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretization::{CellPhases, DiscretizationError, Grid, Radial, WeightRule};
use crate::numerics;

const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("point {0:?} lies outside [-1,1]^n")]
    Domain(Vec<f64>),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("weight is not differentiable at {0:?}")]
    SingularPoint(Vec<f64>),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate pair: xi equals eta")]
    DegeneratePair,
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
}

/// Parametric form of a spatial coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientKind {
    Constant { value: f64 },
    /// `|x - center|^alpha`.
    PowerWeight { alpha: f64, center: Vec<f64> },
    /// Node samples on the uniform grid of `[-1,1]^dim`, multilinear in between.
    Tabulated { n_nodes: usize, samples: Vec<f64> },
}

/// A nonnegative spatial weight with its degenerate set and integrability metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    kind: CoefficientKind,
    dim: usize,
    degenerate_points: Vec<Vec<f64>>,
    s_exponent: f64,
    r_exponent: f64,
}

fn in_domain(x: &[f64]) -> bool {
    x.iter().all(|c| c.abs() <= 1.0 + DOMAIN_TOL)
}

impl Coefficient {
    pub fn new(kind: CoefficientKind, dim: usize) -> Result<Self, DensityError> {
        if !(dim == 1 || dim == 2) {
            return Err(DensityError::Dimension(format!("dim {dim}")));
        }
        let inf = f64::INFINITY;
        let (degenerate_points, s_exponent, r_exponent) = match &kind {
            CoefficientKind::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(DensityError::Parameter(format!("constant {value} must be >= 0")));
                }
                if *value > 0.0 {
                    (vec![], inf, inf)
                } else {
                    (vec![], 0.0, inf)
                }
            }
            CoefficientKind::PowerWeight { alpha, center } => {
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(DensityError::Parameter(format!("alpha {alpha} must be >= 0")));
                }
                if center.len() != dim || center.iter().any(|c| !c.is_finite()) {
                    return Err(DensityError::Dimension(format!("center {center:?} in dim {dim}")));
                }
                if *alpha == 0.0 || !in_domain(center) {
                    (vec![], inf, inf)
                } else {
                    let n = dim as f64;
                    let r = if *alpha < 1.0 { n / (1.0 - alpha) } else { inf };
                    (vec![center.clone()], n / alpha, r)
                }
            }
            CoefficientKind::Tabulated { n_nodes, samples } => {
                let grid = Grid::new(dim, *n_nodes)?;
                if samples.len() != grid.n_nodes() {
                    return Err(DensityError::Dimension(format!(
                        "{} samples for {} nodes",
                        samples.len(),
                        grid.n_nodes()
                    )));
                }
                if samples.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(DensityError::Parameter("tabulated samples must be finite and >= 0".into()));
                }
                let zeros: Vec<Vec<f64>> = (0..grid.n_nodes())
                    .filter(|&k| samples[k] == 0.0)
                    .map(|k| grid.node_point(k)[..dim].to_vec())
                    .collect();
                // Piecewise multilinear data vanish at most linearly.
                let s = if zeros.is_empty() { inf } else { dim as f64 };
                (zeros, s, inf)
            }
        };
        Ok(Self { kind, dim, degenerate_points, s_exponent, r_exponent })
    }

    pub fn constant(value: f64, dim: usize) -> Result<Self, DensityError> {
        Self::new(CoefficientKind::Constant { value }, dim)
    }

    pub fn power_weight(alpha: f64, center: &[f64]) -> Result<Self, DensityError> {
        Self::new(CoefficientKind::PowerWeight { alpha, center: center.to_vec() }, center.len())
    }

    pub fn tabulated(grid: &Grid, samples: Vec<f64>) -> Result<Self, DensityError> {
        Self::new(CoefficientKind::Tabulated { n_nodes: grid.n_axis(), samples }, grid.dim())
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn degenerate_points(&self) -> &[Vec<f64>] {
        &self.degenerate_points
    }
    /// Supremum of the `s` with `1/a` locally `L^s` (strict); `inf` when bounded away from 0.
    pub fn s_exponent(&self) -> f64 {
        self.s_exponent
    }
    /// Supremum of the `r` with `Da` locally `L^r` (strict).
    pub fn r_exponent(&self) -> f64 {
        self.r_exponent
    }

    fn check(&self, x: &[f64]) -> Result<(), DensityError> {
        if x.len() != self.dim {
            return Err(DensityError::Dimension(format!("point {x:?} in dim {}", self.dim)));
        }
        if !in_domain(x) {
            return Err(DensityError::Domain(x.to_vec()));
        }
        Ok(())
    }

    fn tab_grid(&self) -> Option<(Grid, &[f64])> {
        match &self.kind {
            CoefficientKind::Tabulated { n_nodes, samples } => {
                Some((Grid::new(self.dim, *n_nodes).expect("validated grid"), samples))
            }
            _ => None,
        }
    }

    fn interpolate(grid: &Grid, samples: &[f64], x: &[f64]) -> f64 {
        let n = grid.n_axis();
        let h = grid.spacing();
        let locate = |c: f64| {
            let s = ((c.clamp(-1.0, 1.0) + 1.0) / h).min((n - 1) as f64);
            let i = (s.floor() as usize).min(n - 2);
            (i, s - i as f64)
        };
        let (i, fx) = locate(x[0]);
        if grid.dim() == 1 {
            return samples[i] * (1.0 - fx) + samples[i + 1] * fx;
        }
        let (j, fy) = locate(x[1]);
        let v = |a: usize, b: usize| samples[grid.node_index([a, b])];
        (1.0 - fy) * ((1.0 - fx) * v(i, j) + fx * v(i + 1, j)) + fy * ((1.0 - fx) * v(i, j + 1) + fx * v(i + 1, j + 1))
    }

    fn value_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            CoefficientKind::Constant { value } => *value,
            CoefficientKind::PowerWeight { alpha, center } => {
                if *alpha == 0.0 {
                    return 1.0;
                }
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.powf(0.5 * alpha)
            }
            CoefficientKind::Tabulated { .. } => {
                let (g, s) = self.tab_grid().expect("tabulated");
                Self::interpolate(&g, s, x)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, DensityError> {
        self.check(x)?;
        Ok(self.value_unchecked(x))
    }

    /// Spatial gradient; analytic for power weights, central differences for tabulated data.
    pub fn gradient(&self, x: &[f64]) -> Result<[f64; 2], DensityError> {
        self.check(x)?;
        let mut out = [0.0; 2];
        match &self.kind {
            CoefficientKind::Constant { .. } => {}
            CoefficientKind::PowerWeight { alpha, center } => {
                if *alpha == 0.0 {
                    return Ok(out);
                }
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                if d2 == 0.0 {
                    if *alpha > 1.0 {
                        return Ok(out);
                    }
                    return Err(DensityError::SingularPoint(x.to_vec()));
                }
                let f = alpha * d2.powf(0.5 * alpha - 1.0);
                for i in 0..self.dim {
                    out[i] = f * (x[i] - center[i]);
                }
            }
            CoefficientKind::Tabulated { .. } => {
                let (g, s) = self.tab_grid().expect("tabulated");
                let h = g.spacing();
                for i in 0..self.dim {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[i] = (x[i] + h).min(1.0);
                    xm[i] = (x[i] - h).max(-1.0);
                    out[i] = (Self::interpolate(&g, s, &xp) - Self::interpolate(&g, s, &xm)) / (xp[i] - xm[i]);
                }
            }
        }
        Ok(out)
    }

    /// `|Da(x)|`.
    pub fn gradient_norm(&self, x: &[f64]) -> Result<f64, DensityError> {
        let g = self.gradient(x)?;
        Ok((g[0] * g[0] + g[1] * g[1]).sqrt())
    }

    /// Supremum over `[-1,1]^dim`.
    pub fn sup(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Constant { value } => *value,
            CoefficientKind::PowerWeight { .. } => {
                let corners: Vec<Vec<f64>> = if self.dim == 1 {
                    vec![vec![-1.0], vec![1.0]]
                } else {
                    vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 1.0]]
                };
                corners.iter().map(|c| self.value_unchecked(c)).fold(0.0, f64::max)
            }
            CoefficientKind::Tabulated { samples, .. } => samples.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Infimum over `[-1,1]^dim`.
    pub fn inf(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Constant { value } => *value,
            CoefficientKind::PowerWeight { center, .. } => {
                let nearest: Vec<f64> = center.iter().map(|c| c.clamp(-1.0, 1.0)).collect();
                self.value_unchecked(&nearest)
            }
            CoefficientKind::Tabulated { samples, .. } => samples.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// `|cell| / \int_cell 1/a`, zero when `1/a` is not integrable on the cell.
    pub fn harmonic_cell_value(&self, grid: &Grid, cell: usize) -> f64 {
        let (lo, hi) = grid.cell_bounds(cell);
        let vol = grid.cell_volume();
        match &self.kind {
            CoefficientKind::Constant { value } => *value,
            CoefficientKind::PowerWeight { alpha, center } => {
                if *alpha == 0.0 {
                    return 1.0;
                }
                let integral = if self.dim == 1 {
                    power_inverse_integral_1d(*alpha, center[0], lo[0], hi[0])
                } else {
                    let gl = numerics::gauss_legendre(6);
                    let f = |x: f64, y: f64| {
                        let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                        d2.powf(-0.5 * alpha)
                    };
                    if *alpha >= 2.0 && rect_contains(lo, hi, center) {
                        f64::INFINITY
                    } else {
                        graded_rect_integral(&f, lo, hi, [center[0], center[1]], &gl, 0)
                    }
                };
                if integral.is_finite() {
                    vol / integral
                } else {
                    0.0
                }
            }
            CoefficientKind::Tabulated { .. } => {
                let (g, s) = self.tab_grid().expect("tabulated");
                let corners: Vec<[f64; 2]> = if self.dim == 1 {
                    vec![[lo[0], 0.0], [hi[0], 0.0]]
                } else {
                    vec![[lo[0], lo[1]], [hi[0], lo[1]], [lo[0], hi[1]], [hi[0], hi[1]]]
                };
                let vals: Vec<f64> = corners.iter().map(|c| Self::interpolate(&g, s, &c[..self.dim])).collect();
                if vals.contains(&0.0) {
                    0.0
                } else {
                    vals.len() as f64 / vals.iter().map(|v| 1.0 / v).sum::<f64>()
                }
            }
        }
    }

    /// One value per cell under `rule`.
    pub fn cell_values(&self, grid: &Grid, rule: WeightRule) -> Result<Vec<f64>, DensityError> {
        if grid.dim() != self.dim {
            return Err(DensityError::Dimension(format!("grid dim {} vs coefficient dim {}", grid.dim(), self.dim)));
        }
        Ok((0..grid.n_cells())
            .map(|c| match rule {
                WeightRule::CellCenter => self.value_unchecked(&grid.cell_center(c)[..self.dim]),
                WeightRule::Harmonic => self.harmonic_cell_value(grid, c),
            })
            .collect())
    }
}

fn rect_contains(lo: [f64; 2], hi: [f64; 2], c: &[f64]) -> bool {
    c[0] >= lo[0] && c[0] <= hi[0] && c[1] >= lo[1] && c[1] <= hi[1]
}

/// `\int_lo^hi |x - c|^{-alpha} dx`.
fn power_inverse_integral_1d(alpha: f64, c: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = (lo - c, hi - c);
    let prim = |y: f64| -> f64 {
        // antiderivative of |y|^{-alpha} on one side of 0, odd in y
        if (alpha - 1.0).abs() < 1e-15 {
            y.signum() * y.abs().ln()
        } else {
            y.signum() * y.abs().powf(1.0 - alpha) / (1.0 - alpha)
        }
    };
    if a < 0.0 && b > 0.0 || a == 0.0 || b == 0.0 {
        if alpha >= 1.0 {
            return f64::INFINITY;
        }
        // split at the singular point
        return prim(b) - prim(a);
    }
    prim(b) - prim(a)
}

/// Tensor Gauss-Legendre on a rectangle, subdividing towards a singular point.
fn graded_rect_integral(
    f: &dyn Fn(f64, f64) -> f64,
    lo: [f64; 2],
    hi: [f64; 2],
    sing: [f64; 2],
    gl: &(Vec<f64>, Vec<f64>),
    depth: usize,
) -> f64 {
    let diam = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
    let nearest = [sing[0].clamp(lo[0], hi[0]), sing[1].clamp(lo[1], hi[1])];
    let dist = ((nearest[0] - sing[0]).powi(2) + (nearest[1] - sing[1]).powi(2)).sqrt();
    if dist < diam && depth < 14 {
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let mut total = 0.0;
        for (a, b) in [(lo[0], mid[0]), (mid[0], hi[0])] {
            for (c, d) in [(lo[1], mid[1]), (mid[1], hi[1])] {
                total += graded_rect_integral(f, [a, c], [b, d], sing, gl, depth + 1);
            }
        }
        return total;
    }
    let (xs, ws) = gl;
    let (hx, hy) = (0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1]));
    let mut s = 0.0;
    for (xi, wi) in xs.iter().zip(ws) {
        for (yj, wj) in xs.iter().zip(ws) {
            let v = f(lo[0] + hx * (xi + 1.0), lo[1] + hy * (yj + 1.0));
            if v.is_finite() {
                s += wi * wj * v;
            }
        }
    }
    s * hx * hy
}

/// Density families with the normalization `g(x, 0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `a(x) ((1+|xi|^2)^{p/2} - 1)`.
    PowerWeight { a: Coefficient },
    /// `a(x) ((1+|xi|^2)^{p/2} - 1) + b(x) ((1+|xi|^2)^{q/2} - 1)`.
    DoublePhase { a: Coefficient, b: Coefficient },
    /// `base + (1/h) ((1+|xi|^2)^{sigma/2} - 1)` with `sigma = ps/(s+1)`.
    Regularized { base: Box<Density>, h: f64, s: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    family: Family,
    p: f64,
    q: f64,
    dim: usize,
}

/// Phase coefficient, its spatial gradient, and its exponent.
#[derive(Clone, Copy, Debug)]
pub struct PhaseTerm {
    pub c: f64,
    pub dc: [f64; 2],
    pub e: f64,
}

impl Density {
    fn check_pq(p: f64, q: f64) -> Result<(), DensityError> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(DensityError::Parameter(format!("p >= 2 (got {p})")));
        }
        if !(q.is_finite() && q >= p) {
            return Err(DensityError::Parameter(format!("q >= p (got q = {q}, p = {p})")));
        }
        Ok(())
    }

    pub fn power_weight(a: Coefficient, p: f64) -> Result<Self, DensityError> {
        Self::check_pq(p, p)?;
        let dim = a.dim();
        Ok(Self { family: Family::PowerWeight { a }, p, q: p, dim })
    }

    pub fn double_phase(a: Coefficient, p: f64, b: Coefficient, q: f64) -> Result<Self, DensityError> {
        Self::check_pq(p, q)?;
        if a.dim() != b.dim() {
            return Err(DensityError::Dimension("a and b live in different dimensions".into()));
        }
        let dim = a.dim();
        Ok(Self { family: Family::DoublePhase { a, b }, p, q, dim })
    }

    /// Adds `(1/h)((1+|xi|^2)^{ps/(2(s+1))} - 1)`; `s = inf` gives exponent `p`.
    pub fn regularized(base: Density, h: f64, s: f64) -> Result<Self, DensityError> {
        if !(h > 0.0) {
            return Err(DensityError::Parameter(format!("h > 0 (got {h})")));
        }
        if !(s >= 1.0) {
            return Err(DensityError::Parameter(format!("s >= 1 (got {s})")));
        }
        let (p, q, dim) = (base.p, base.q, base.dim);
        Ok(Self { family: Family::Regularized { base: Box::new(base), h, s }, p, q, dim })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The ellipticity weight `a`.
    pub fn a(&self) -> &Coefficient {
        match &self.family {
            Family::PowerWeight { a } | Family::DoublePhase { a, .. } => a,
            Family::Regularized { base, .. } => base.a(),
        }
    }

    pub fn b(&self) -> Option<&Coefficient> {
        match &self.family {
            Family::PowerWeight { .. } => None,
            Family::DoublePhase { b, .. } => Some(b),
            Family::Regularized { base, .. } => base.b(),
        }
    }

    /// The unregularized density.
    pub fn base(&self) -> &Density {
        match &self.family {
            Family::Regularized { base, .. } => base.base(),
            _ => self,
        }
    }

    pub fn sigma_of(p: f64, s: f64) -> f64 {
        if s.is_infinite() {
            p
        } else {
            p * s / (s + 1.0)
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<(), DensityError> {
        if x.len() != self.dim {
            return Err(DensityError::Dimension(format!("point {x:?} in dim {}", self.dim)));
        }
        if !in_domain(x) {
            return Err(DensityError::Domain(x.to_vec()));
        }
        Ok(())
    }

    fn check_xi(&self, xi: &[f64]) -> Result<(), DensityError> {
        if xi.is_empty() || !xi.len().is_multiple_of(self.dim) {
            return Err(DensityError::Dimension(format!("xi of length {} is not N x {}", xi.len(), self.dim)));
        }
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(DensityError::Parameter("xi must be finite".into()));
        }
        Ok(())
    }

    /// Phase list at `x` without coefficient gradients.
    pub fn phases(&self, x: &[f64]) -> Result<Vec<(f64, f64)>, DensityError> {
        self.check_point(x)?;
        Ok(match &self.family {
            Family::PowerWeight { a } => vec![(a.value(x)?, self.p)],
            Family::DoublePhase { a, b } => vec![(a.value(x)?, self.p), (b.value(x)?, self.q)],
            Family::Regularized { base, h, s } => {
                let mut v = base.phases(x)?;
                v.push((1.0 / h, Self::sigma_of(self.p, *s)));
                v
            }
        })
    }

    /// Phase list with coefficient gradients; fails at kinks of a weight.
    pub fn phase_terms(&self, x: &[f64]) -> Result<Vec<PhaseTerm>, DensityError> {
        self.check_point(x)?;
        let term = |c: &Coefficient, e: f64| -> Result<PhaseTerm, DensityError> {
            Ok(PhaseTerm { c: c.value(x)?, dc: c.gradient(x)?, e })
        };
        Ok(match &self.family {
            Family::PowerWeight { a } => vec![term(a, self.p)?],
            Family::DoublePhase { a, b } => vec![term(a, self.p)?, term(b, self.q)?],
            Family::Regularized { base, h, s } => {
                let mut v = base.phase_terms(x)?;
                v.push(PhaseTerm { c: 1.0 / h, dc: [0.0; 2], e: Self::sigma_of(self.p, *s) });
                v
            }
        })
    }

    pub fn radial(&self, x: &[f64], t2: f64) -> Result<Radial, DensityError> {
        let mut r = Radial::default();
        for (c, e) in self.phases(x)? {
            r.add(Radial::phase(c, e, t2));
        }
        Ok(r)
    }

    /// Normalized value `g(x, |xi|)` with `g(x, 0) = 0`.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<f64, DensityError> {
        self.check_xi(xi)?;
        let t2: f64 = xi.iter().map(|v| v * v).sum();
        Ok(self.radial(x, t2)?.g)
    }

    /// Value before the subtraction of `f(x, 0)`.
    pub fn eval_raw(&self, x: &[f64], xi: &[f64]) -> Result<f64, DensityError> {
        self.check_xi(xi)?;
        let t2: f64 = xi.iter().map(|v| v * v).sum();
        Ok(self.phases(x)?.iter().map(|(c, e)| c * (1.0 + t2).powf(0.5 * e)).sum())
    }

    /// `<f_xixi(x, xi) lam, lam>`; at `xi = 0` this is the analytic limit `g_tt(x,0)|lam|^2`.
    pub fn hessian_form(&self, x: &[f64], xi: &[f64], lam: &[f64]) -> Result<f64, DensityError> {
        self.check_xi(xi)?;
        if lam.len() != xi.len() {
            return Err(DensityError::Dimension("lambda and xi differ in shape".into()));
        }
        let t2: f64 = xi.iter().map(|v| v * v).sum();
        let r = self.radial(x, t2)?;
        let dot: f64 = xi.iter().zip(lam).map(|(a, b)| a * b).sum();
        let l2: f64 = lam.iter().map(|v| v * v).sum();
        Ok(r.flux * l2 + r.shear * dot * dot)
    }

    /// Frobenius norm of `f_xi x(x, xi)`, i.e. `|xi| |sum Dc e (1+|xi|^2)^{e/2-1}|`.
    pub fn mixed_derivative_norm(&self, x: &[f64], xi: &[f64]) -> Result<f64, DensityError> {
        self.check_xi(xi)?;
        let t2: f64 = xi.iter().map(|v| v * v).sum();
        let w = 1.0 + t2;
        let mut v = [0.0; 2];
        for term in self.phase_terms(x)? {
            let f = term.e * w.powf(0.5 * term.e - 1.0);
            v[0] += term.dc[0] * f;
            v[1] += term.dc[1] * f;
        }
        Ok(t2.sqrt() * (v[0] * v[0] + v[1] * v[1]).sqrt())
    }

    /// Mixed-derivative coefficient `k = p|Da| + q|Db|`.
    pub fn k_value(&self, x: &[f64]) -> Result<f64, DensityError> {
        match &self.family {
            Family::PowerWeight { a } => Ok(self.p * a.gradient_norm(x)?),
            Family::DoublePhase { a, b } => Ok(self.p * a.gradient_norm(x)? + self.q * b.gradient_norm(x)?),
            Family::Regularized { base, .. } => base.k_value(x),
        }
    }

    /// Strict integrability bound for `k`: the smaller `r_exponent` of the weights.
    pub fn k_r_exponent(&self) -> f64 {
        match &self.family {
            Family::PowerWeight { a } => a.r_exponent(),
            Family::DoublePhase { a, b } => a.r_exponent().min(b.r_exponent()),
            Family::Regularized { base, .. } => base.k_r_exponent(),
        }
    }

    /// Upper ellipticity constant `L = sum e max(1, e-1) sup c`.
    pub fn upper_constant(&self) -> f64 {
        let term = |c: f64, e: f64| e * (e - 1.0).max(1.0) * c;
        match &self.family {
            Family::PowerWeight { a } => term(a.sup(), self.p),
            Family::DoublePhase { a, b } => term(a.sup(), self.p) + term(b.sup(), self.q),
            Family::Regularized { base, h, s } => base.upper_constant() + term(1.0 / h, Self::sigma_of(self.p, *s)),
        }
    }

    /// Sum of the phase coefficients, the upper growth weight with `f <= B (1+|xi|^2)^{q/2}`.
    pub fn upper_weight(&self, x: &[f64]) -> Result<f64, DensityError> {
        Ok(self.phases(x)?.iter().map(|(c, _)| c).sum())
    }

    /// Per-cell phase coefficients under `rule`.
    pub fn cell_phases(&self, grid: &Grid, rule: WeightRule) -> Result<CellPhases, DensityError> {
        if grid.dim() != self.dim {
            return Err(DensityError::Dimension(format!("grid dim {} vs density dim {}", grid.dim(), self.dim)));
        }
        Ok(match &self.family {
            Family::PowerWeight { a } => {
                CellPhases::new(grid.n_cells(), vec![self.p], a.cell_values(grid, rule)?)?
            }
            Family::DoublePhase { a, b } => {
                let (va, vb) = (a.cell_values(grid, rule)?, b.cell_values(grid, rule)?);
                let coeffs = va.iter().zip(&vb).flat_map(|(x, y)| [*x, *y]).collect();
                CellPhases::new(grid.n_cells(), vec![self.p, self.q], coeffs)?
            }
            Family::Regularized { base, h, s } => {
                base.cell_phases(grid, rule)?.with_constant_phase(1.0 / h, Self::sigma_of(self.p, *s))
            }
        })
    }
}

/// `V_p(xi) = (1+|xi|^2)^{(p-2)/4} xi`; intended for `p >= 2`.
pub fn v_p_map(xi: &[f64], p: f64) -> Vec<f64> {
    let t2: f64 = xi.iter().map(|v| v * v).sum();
    let f = (0.25 * (p - 2.0) * t2.ln_1p()).exp();
    xi.iter().map(|v| f * v).collect()
}

/// `|V_p(xi) - V_p(eta)|^2 / (|xi - eta|^2 (1+|xi|^2+|eta|^2)^{(p-2)/2})`.
pub fn vp_equivalence_ratio(xi: &[f64], eta: &[f64], p: f64) -> Result<f64, DensityError> {
    if xi.len() != eta.len() {
        return Err(DensityError::Dimension("xi and eta differ in shape".into()));
    }
    let d2: f64 = xi.iter().zip(eta).map(|(a, b)| (a - b) * (a - b)).sum();
    if d2 == 0.0 {
        return Err(DensityError::DegeneratePair);
    }
    if p == 2.0 {
        return Ok(1.0);
    }
    let (vx, ve) = (v_p_map(xi, p), v_p_map(eta, p));
    let dv2: f64 = vx.iter().zip(&ve).map(|(a, b)| (a - b) * (a - b)).sum();
    let s: f64 = xi.iter().chain(eta).map(|v| v * v).sum();
    Ok(dv2 / (d2 * (1.0 + s).powf(0.5 * (p - 2.0))))
}

/// A sampled point `x` with a gradient matrix `xi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

/// Uniform points in `[-1,1]^dim` and gradients with log-uniform magnitude up to `t_max`.
pub fn random_samples<R: Rng>(rng: &mut R, dim: usize, components: usize, count: usize, t_max: f64) -> Vec<Sample> {
    (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mut xi: Vec<f64> = (0..dim * components).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let mag = (rng.gen_range((1e-6f64).ln()..t_max.ln())).exp();
            xi.iter_mut().for_each(|v| *v *= mag / norm);
            Sample { x, xi }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthViolation {
    pub sample: Sample,
    pub bound: &'static str,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    /// Largest `c` with `c a (1+|xi|^2)^{(p-2)/2} |xi|^2 <= f` on the samples.
    pub c_lower: f64,
    pub upper_ok: bool,
    pub samples: usize,
    pub violation: Option<GrowthViolation>,
}

/// Checks `c a (1+|xi|^2)^{(p-2)/2}|xi|^2 <= f(x,xi) <= B(x)(1+|xi|^2)^{q/2} + f(x,0)` on samples,
/// with `B` the sum of the phase coefficients. Violations are reported, not raised.
pub fn growth_from_ellipticity(d: &Density, samples: &[Sample]) -> Result<GrowthReport, DensityError> {
    let mut c_lower = f64::INFINITY;
    let mut upper_ok = true;
    let mut violation = None;
    for s in samples {
        let f = d.eval(&s.x, &s.xi)?;
        let t2: f64 = s.xi.iter().map(|v| v * v).sum();
        let w = 1.0 + t2;
        let a = d.a().value(&s.x)?;
        let lower = a * w.powf(0.5 * (d.p() - 2.0)) * t2;
        if lower > 0.0 {
            let ratio = f / lower;
            if ratio <= 0.0 && violation.is_none() {
                violation = Some(GrowthViolation { sample: s.clone(), bound: "lower", value: f, limit: lower });
            }
            c_lower = c_lower.min(ratio);
        }
        let upper = d.upper_weight(&s.x)? * w.powf(0.5 * d.q());
        if f > upper * (1.0 + 1e-12) {
            upper_ok = false;
            if violation.is_none() {
                violation = Some(GrowthViolation { sample: s.clone(), bound: "upper", value: f, limit: upper });
            }
        }
    }
    Ok(GrowthReport { c_lower, upper_ok, samples: samples.len(), violation })
}
