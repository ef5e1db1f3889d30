use rayon::prelude::*;

use super::{DiscreteField, DiscretizationError, Grid};
use crate::numerics;

/// Radial profile of an integrand at `t = |Du|`: the value `g`, the flux
/// `g_t / t` and the shear `(g_tt - g_t/t) / t^2`, so that the Hessian in the
/// gradient is `flux * I + shear * G (x) G`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Radial {
    pub g: f64,
    pub flux: f64,
    pub shear: f64,
}

impl Radial {
    /// One normalized phase `c ((1+t^2)^{e/2} - 1)`.
    #[inline]
    pub fn phase(c: f64, e: f64, t2: f64) -> Radial {
        if c == 0.0 {
            return Radial::default();
        }
        let half = 0.5 * e;
        let lw = t2.ln_1p();
        let wpow = (half * lw).exp();
        let w = 1.0 + t2;
        Radial {
            g: c * (half * lw).exp_m1(),
            flux: c * e * wpow / w,
            shear: c * e * (e - 2.0) * wpow / (w * w),
        }
    }

    pub fn add(&mut self, other: Radial) {
        self.g += other.g;
        self.flux += other.flux;
        self.shear += other.shear;
    }
}

/// A convex radial integrand evaluated cell by cell.
pub trait CellIntegrand: Sync {
    /// Profile in `cell` at squared gradient norm `t2`; `None` outside the effective domain.
    fn radial(&self, cell: usize, t2: f64) -> Option<Radial>;
}

/// Per-cell coefficients of a sum of normalized phases with shared exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPhases {
    exponents: Vec<f64>,
    coeffs: Vec<f64>,
}

impl CellPhases {
    pub fn new(n_cells: usize, exponents: Vec<f64>, coeffs: Vec<f64>) -> Result<Self, DiscretizationError> {
        let m = exponents.len();
        if coeffs.len() != n_cells * m {
            return Err(DiscretizationError::Shape(format!(
                "{} coefficients for {n_cells} cells x {m} phases",
                coeffs.len()
            )));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite() || *c < 0.0) {
            return Err(DiscretizationError::QuadratureSingularity { cell: k / m.max(1) });
        }
        Ok(Self { exponents, coeffs })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn n_cells(&self) -> usize {
        self.coeffs.len() / self.exponents.len().max(1)
    }

    pub fn coeff(&self, cell: usize, term: usize) -> f64 {
        self.coeffs[cell * self.exponents.len() + term]
    }

    /// Adds a spatially constant phase `c ((1+t^2)^{e/2} - 1)`.
    pub fn with_constant_phase(&self, c: f64, e: f64) -> Self {
        let m = self.exponents.len();
        let mut exponents = self.exponents.clone();
        exponents.push(e);
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + self.n_cells());
        for cell in 0..self.n_cells() {
            coeffs.extend_from_slice(&self.coeffs[cell * m..(cell + 1) * m]);
            coeffs.push(c);
        }
        Self { exponents, coeffs }
    }
}

impl CellIntegrand for CellPhases {
    fn radial(&self, cell: usize, t2: f64) -> Option<Radial> {
        let m = self.exponents.len();
        let mut r = Radial::default();
        for (k, &e) in self.exponents.iter().enumerate() {
            r.add(Radial::phase(self.coeffs[cell * m + k], e, t2));
        }
        Some(r)
    }
}

/// Symmetric banded matrix holding the lower band `H[i][i-k]`, `k <= bw`.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }
    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + (i - j)
    }

    /// Adds `v` to `H[i][j]` (and implicitly `H[j][i]`); only call with `i >= j`.
    #[inline]
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i >= j && i - j <= self.bw);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.data[self.idx(i, i)]
    }

    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.n {
            let k = self.idx(i, i);
            self.data[k] += shift;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Banded Cholesky factor `L` (same layout); `None` if a pivot is not safely positive.
    pub fn cholesky(&self) -> Option<BandMatrix> {
        let mut l = self.clone();
        let w = self.bw + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(self.bw));
                let mut s = l.data[i * w + (i - j)];
                for k in k0..j {
                    s -= l.data[i * w + (i - k)] * l.data[j * w + (j - k)];
                }
                if i == j {
                    let scale = self.data[i * w].abs().max(f64::MIN_POSITIVE);
                    if !(s > 1e-14 * scale) {
                        return None;
                    }
                    l.data[i * w] = s.sqrt();
                } else {
                    l.data[i * w + (i - j)] = s / l.data[j * w];
                }
            }
        }
        Some(l)
    }

    /// Solves `L L^T x = b` for a factor returned by [`cholesky`](Self::cholesky).
    pub fn cholesky_solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            let lo = i.saturating_sub(self.bw);
            for (k, yk) in y.iter().enumerate().take(i).skip(lo) {
                s -= self.data[i * w + (i - k)] * yk;
            }
            y[i] = s / self.data[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for (k, yk) in y.iter().enumerate().take((i + w).min(self.n)).skip(i + 1) {
                s -= self.data[k * w + (k - i)] * yk;
            }
            y[i] = s / self.data[i * w];
        }
        y
    }
}

const FIXED: usize = usize::MAX;

/// The discrete energy `E(u) = sum_cells vol * g(cell, |Du_cell|)` as a function
/// of the free (non-boundary) node values, components interleaved per node.
pub struct DiscreteProblem<'a, I: CellIntegrand + ?Sized> {
    template: DiscreteField,
    integrand: &'a I,
    free: Vec<usize>,
    rank: Vec<usize>,
    bandwidth: usize,
    stencils: Vec<[f64; 4]>,
}

impl<'a, I: CellIntegrand + ?Sized> DiscreteProblem<'a, I> {
    /// `template` supplies the Dirichlet values on its boundary mask. At most four components.
    pub fn new(template: &DiscreteField, integrand: &'a I) -> Self {
        assert!(template.components() <= 4, "at most 4 components");
        let grid = template.grid();
        let mask = template.boundary_mask();
        let mut rank = vec![FIXED; grid.n_nodes()];
        let mut free = Vec::new();
        for node in 0..grid.n_nodes() {
            if !mask[node] {
                rank[node] = free.len();
                free.push(node);
            }
        }
        let nc = template.components();
        let mut span = 0;
        for cell in 0..grid.n_cells() {
            let ranks: Vec<usize> = grid.cell_corners(cell)[..grid.corners_per_cell()]
                .iter()
                .map(|&k| rank[k])
                .filter(|&r| r != FIXED)
                .collect();
            if let (Some(lo), Some(hi)) = (ranks.iter().min(), ranks.iter().max()) {
                span = span.max(hi - lo);
            }
        }
        let stencils = (0..grid.dim()).map(|a| grid.gradient_stencil(a)).collect();
        Self {
            template: template.clone(),
            integrand,
            free,
            rank,
            bandwidth: span * nc + nc - 1,
            stencils,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.template.grid()
    }
    pub fn components(&self) -> usize {
        self.template.components()
    }
    pub fn n_unknowns(&self) -> usize {
        self.free.len() * self.components()
    }
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }
    pub fn template(&self) -> &DiscreteField {
        &self.template
    }

    pub fn unknowns(&self, field: &DiscreteField) -> Vec<f64> {
        self.free.iter().flat_map(|&k| field.node(k).to_vec()).collect()
    }

    pub fn assemble(&self, x: &[f64]) -> DiscreteField {
        let nc = self.components();
        let mut f = self.template.clone();
        for (r, &node) in self.free.iter().enumerate() {
            f.node_mut(node).copy_from_slice(&x[r * nc..(r + 1) * nc]);
        }
        f
    }

    fn cell_gradient(&self, field: &DiscreteField, cell: usize, out: &mut [f64]) -> f64 {
        let grid = field.grid();
        let (dim, nc) = (grid.dim(), field.components());
        let corners = grid.cell_corners(cell);
        let mut t2 = 0.0;
        for alpha in 0..nc {
            for (i, s) in self.stencils.iter().enumerate() {
                let mut g = 0.0;
                for k in 0..grid.corners_per_cell() {
                    g += s[k] * field.node(corners[k])[alpha];
                }
                out[alpha * dim + i] = g;
                t2 += g * g;
            }
        }
        t2
    }

    /// Energy of a full field; `None` if some cell leaves the integrand's domain.
    pub fn energy_of(&self, field: &DiscreteField) -> Option<f64> {
        let grid = field.grid();
        let vol = grid.cell_volume();
        let width = field.components() * grid.dim();
        let cell_values: Vec<f64> = (0..grid.n_cells())
            .into_par_iter()
            .map(|cell| {
                let mut g = [0.0; 16];
                let t2 = self.cell_gradient(field, cell, &mut g[..width]);
                self.integrand.radial(cell, t2).map_or(f64::NAN, |r| vol * r.g)
            })
            .collect();
        if cell_values.iter().any(|v| v.is_nan()) {
            return None;
        }
        Some(numerics::sum(cell_values))
    }

    pub fn energy(&self, x: &[f64]) -> Option<f64> {
        self.energy_of(&self.assemble(x))
    }

    /// Per-cell gradient contributions `vol * flux * G . S_k`, laid out `(cell, corner, alpha)`.
    fn local_gradients(&self, field: &DiscreteField) -> Option<(f64, Vec<f64>)> {
        let grid = field.grid();
        let (dim, nc) = (grid.dim(), field.components());
        let corners = grid.corners_per_cell();
        let vol = grid.cell_volume();
        let stride = corners * nc;
        let mut local = vec![0.0; grid.n_cells() * stride];
        let energies: Vec<f64> = local
            .par_chunks_mut(stride)
            .enumerate()
            .map(|(cell, out)| {
                let mut g = [0.0; 16];
                let t2 = self.cell_gradient(field, cell, &mut g[..nc * dim]);
                let Some(r) = self.integrand.radial(cell, t2) else {
                    return f64::NAN;
                };
                for k in 0..corners {
                    for alpha in 0..nc {
                        let mut acc = 0.0;
                        for (i, s) in self.stencils.iter().enumerate() {
                            acc += g[alpha * dim + i] * s[k];
                        }
                        out[k * nc + alpha] = vol * r.flux * acc;
                    }
                }
                vol * r.g
            })
            .collect();
        if energies.iter().any(|v| v.is_nan()) {
            return None;
        }
        Some((numerics::sum(energies), local))
    }

    /// Energy and its gradient with respect to the free unknowns.
    pub fn energy_gradient(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let field = self.assemble(x);
        let (e, local) = self.local_gradients(&field)?;
        let grid = field.grid();
        let nc = field.components();
        let corners = grid.corners_per_cell();
        let mut grad = vec![0.0; self.n_unknowns()];
        for cell in 0..grid.n_cells() {
            let cn = grid.cell_corners(cell);
            for k in 0..corners {
                let r = self.rank[cn[k]];
                if r == FIXED {
                    continue;
                }
                for alpha in 0..nc {
                    grad[r * nc + alpha] += local[(cell * corners + k) * nc + alpha];
                }
            }
        }
        Some((e, grad))
    }

    /// First variation with respect to every node value, boundary included.
    pub fn first_variation(&self, field: &DiscreteField) -> Option<Vec<f64>> {
        let (_, local) = self.local_gradients(field)?;
        let grid = field.grid();
        let nc = field.components();
        let corners = grid.corners_per_cell();
        let mut out = vec![0.0; grid.n_nodes() * nc];
        for cell in 0..grid.n_cells() {
            let cn = grid.cell_corners(cell);
            for k in 0..corners {
                for alpha in 0..nc {
                    out[cn[k] * nc + alpha] += local[(cell * corners + k) * nc + alpha];
                }
            }
        }
        Some(out)
    }

    /// Banded Hessian with respect to the free unknowns.
    pub fn hessian(&self, x: &[f64]) -> Option<BandMatrix> {
        let field = self.assemble(x);
        let grid = field.grid();
        let (dim, nc) = (grid.dim(), field.components());
        let corners = grid.corners_per_cell();
        let vol = grid.cell_volume();
        let m = corners * nc;
        let mut local = vec![0.0; grid.n_cells() * m * m];
        let ok = local.par_chunks_mut(m * m).enumerate().all(|(cell, out)| {
            let mut g = [0.0; 16];
            let t2 = self.cell_gradient(&field, cell, &mut g[..nc * dim]);
            let Some(r) = self.integrand.radial(cell, t2) else {
                return false;
            };
            // sg[k][alpha] = sum_i G[alpha][i] S_i[k]
            let mut sg = [0.0; 16];
            for k in 0..corners {
                for alpha in 0..nc {
                    sg[k * nc + alpha] =
                        (0..dim).map(|i| g[alpha * dim + i] * self.stencils[i][k]).sum();
                }
            }
            for k in 0..corners {
                for l in 0..corners {
                    let ss: f64 = (0..dim).map(|i| self.stencils[i][k] * self.stencils[i][l]).sum();
                    for a in 0..nc {
                        for b in 0..nc {
                            let mut v = r.shear * sg[k * nc + a] * sg[l * nc + b];
                            if a == b {
                                v += r.flux * ss;
                            }
                            out[(k * nc + a) * m + l * nc + b] = vol * v;
                        }
                    }
                }
            }
            true
        });
        if !ok {
            return None;
        }
        let mut h = BandMatrix::zeros(self.n_unknowns(), self.bandwidth);
        for cell in 0..grid.n_cells() {
            let cn = grid.cell_corners(cell);
            let block = &local[cell * m * m..(cell + 1) * m * m];
            for k in 0..corners {
                let rk = self.rank[cn[k]];
                if rk == FIXED {
                    continue;
                }
                for l in 0..corners {
                    let rl = self.rank[cn[l]];
                    if rl == FIXED {
                        continue;
                    }
                    for a in 0..nc {
                        for b in 0..nc {
                            let (i, j) = (rk * nc + a, rl * nc + b);
                            if i >= j {
                                h.add_lower(i, j, block[(k * nc + a) * m + l * nc + b]);
                            }
                        }
                    }
                }
            }
        }
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_cholesky_solves() {
        let n = 12;
        let mut a = BandMatrix::zeros(n, 2);
        for i in 0..n {
            a.add_lower(i, i, 6.0);
            if i >= 1 {
                a.add_lower(i, i - 1, -2.0);
            }
            if i >= 2 {
                a.add_lower(i, i - 2, 0.5);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let l = a.cholesky().unwrap();
        let y = l.cholesky_solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
        let mut singular = BandMatrix::zeros(2, 1);
        singular.add_lower(0, 0, 1.0);
        singular.add_lower(1, 0, 1.0);
        singular.add_lower(1, 1, 1.0);
        assert!(singular.cholesky().is_none());
    }

    #[test]
    fn phase_derivatives_match_differences() {
        let (c, e) = (0.7, 3.3);
        for &t in &[0.0, 0.3, 1.0, 4.0] {
            let r = Radial::phase(c, e, t * t);
            let g = |t: f64| c * ((1.0 + t * t).powf(e / 2.0) - 1.0);
            assert!((r.g - g(t)).abs() < 1e-12);
            if t > 0.0 {
                let d = 1e-6;
                let gt = (g(t + d) - g(t - d)) / (2.0 * d);
                let gtt = (g(t + d) - 2.0 * g(t) + g(t - d)) / (d * d);
                assert!((r.flux - gt / t).abs() < 1e-6 * r.flux.abs().max(1.0));
                let shear = (gtt - gt / t) / (t * t);
                assert!((r.shear - shear).abs() < 1e-3 * r.shear.abs().max(1.0));
            }
        }
    }
}
