use super::{CellArray, DiscreteField, DiscretizationError, Grid, IndexBox, NodeArray};
use crate::numerics;

/// Concentric sub-square `max_i |x_i| <= half_width` standing in for a ball `B_R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub half_width: f64,
}

impl Region {
    pub fn full() -> Self {
        Self { half_width: 1.0 }
    }

    pub fn new(half_width: f64) -> Self {
        Self { half_width }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.abs() <= self.half_width + 1e-12)
    }

    /// Nodes of `grid` inside the region.
    pub fn node_box(&self, grid: &Grid) -> IndexBox {
        let n = grid.n_axis();
        let lo = (0..n).find(|&i| grid.coord(i) >= -self.half_width - 1e-12).unwrap_or(n);
        let hi = (0..n).rev().find(|&i| grid.coord(i) <= self.half_width + 1e-12).map_or(0, |i| i + 1);
        if grid.dim() == 1 {
            IndexBox { lo: [lo, 0], hi: [hi, 1] }
        } else {
            IndexBox { lo: [lo, lo], hi: [hi, hi] }
        }
    }

    /// Cells whose centre lies inside the region.
    pub fn cells(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.n_cells())
            .filter(|&c| self.contains(&grid.cell_center(c)[..grid.dim()]))
            .collect()
    }
}

/// Per-cell gradient from the corner values; exact on affine fields.
pub fn discrete_gradient(field: &DiscreteField) -> CellArray {
    let grid = field.grid();
    let (dim, nc) = (grid.dim(), field.components());
    let corners = grid.corners_per_cell();
    let stencils: Vec<[f64; 4]> = (0..dim).map(|a| grid.gradient_stencil(a)).collect();
    let mut values = vec![0.0; grid.n_cells() * nc * dim];
    for cell in 0..grid.n_cells() {
        let cn = grid.cell_corners(cell);
        for alpha in 0..nc {
            for (axis, s) in stencils.iter().enumerate() {
                let mut g = 0.0;
                for k in 0..corners {
                    g += s[k] * field.node(cn[k])[alpha];
                }
                values[(cell * nc + alpha) * dim + axis] = g;
            }
        }
    }
    CellArray { grid: grid.clone(), components: nc, values }
}

/// `tau_{s,h} u(x) = u(x + h e_s) - u(x)` with `h = steps * spacing`, on the shrunk window.
pub fn tau_shift(arr: &NodeArray, axis: usize, steps: isize) -> Result<NodeArray, DiscretizationError> {
    let grid = &arr.grid;
    if axis >= grid.dim() || steps.unsigned_abs() >= grid.n_axis() {
        return Err(DiscretizationError::ShiftOutOfRange { axis, steps });
    }
    let mut valid = arr.valid;
    let k = steps.unsigned_abs();
    if steps > 0 {
        valid.hi[axis] = valid.hi[axis].saturating_sub(k).max(valid.lo[axis]);
    } else {
        valid.lo[axis] = (valid.lo[axis] + k).min(valid.hi[axis]);
    }
    let mut out = NodeArray::zeros(grid, arr.components, valid);
    for ij in valid.iter() {
        let mut shifted = ij;
        shifted[axis] = (ij[axis] as isize + steps) as usize;
        let (a, b) = (arr.at(shifted).to_vec(), arr.at(ij));
        let dst = out.at_mut(ij);
        for c in 0..a.len() {
            dst[c] = a[c] - b[c];
        }
    }
    Ok(out)
}

/// Forward edge difference `D_s u = tau_{s,h} u / h` for one grid step.
pub fn axis_difference(arr: &NodeArray, axis: usize) -> Result<NodeArray, DiscretizationError> {
    let mut out = tau_shift(arr, axis, 1)?;
    let h = arr.grid.spacing();
    out.values.iter_mut().for_each(|v| *v /= h);
    Ok(out)
}

/// Central second differences at interior nodes. Component layout is
/// `(alpha * dim + i) * dim + j` for `D_ij u^alpha`; exact on quadratics.
pub fn discrete_second_differences(field: &DiscreteField) -> NodeArray {
    let grid = field.grid();
    let (dim, nc, h) = (grid.dim(), field.components(), grid.spacing());
    let arr = field.as_array();
    let valid = IndexBox::interior(grid);
    let mut out = NodeArray::zeros(grid, nc * dim * dim, valid);
    let shift = |ij: [usize; 2], d: [isize; 2]| -> [usize; 2] {
        [(ij[0] as isize + d[0]) as usize, (ij[1] as isize + d[1]) as usize]
    };
    for ij in valid.iter() {
        for alpha in 0..nc {
            let u = |d: [isize; 2]| arr.at(shift(ij, d))[alpha];
            for i in 0..dim {
                for j in 0..dim {
                    let v = if i == j {
                        let mut e = [0isize; 2];
                        e[i] = 1;
                        (u(e) - 2.0 * u([0, 0]) + u([-e[0], -e[1]])) / (h * h)
                    } else {
                        (u([1, 1]) - u([1, -1]) - u([-1, 1]) + u([-1, -1])) / (4.0 * h * h)
                    };
                    out.at_mut(ij)[(alpha * dim + i) * dim + j] = v;
                }
            }
        }
    }
    out
}

/// `sum vol <a, b>` over the common window of two node arrays.
pub fn inner_product(a: &NodeArray, b: &NodeArray) -> f64 {
    let window = a.valid.intersect(&b.valid);
    let vol = a.grid.node_volume();
    numerics::sum(window.iter().map(|ij| {
        let (x, y) = (a.at(ij), b.at(ij));
        vol * x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>()
    }))
}

fn lt_from_magnitudes(mags: impl Iterator<Item = f64>, vol: f64, t: f64) -> f64 {
    if t.is_infinite() {
        return mags.fold(0.0, f64::max);
    }
    numerics::sum(mags.map(|m| vol * m.powf(t))).powf(1.0 / t)
}

/// `(sum vol |v|^t)^{1/t}` over valid nodes inside `region`; `t = inf` gives the max.
pub fn norm_lt(arr: &NodeArray, t: f64, region: Option<&Region>) -> f64 {
    let window = match region {
        Some(r) => arr.valid.intersect(&r.node_box(&arr.grid)),
        None => arr.valid,
    };
    let mags = window.iter().map(|ij| arr.at(ij).iter().map(|v| v * v).sum::<f64>().sqrt());
    lt_from_magnitudes(mags, arr.grid.node_volume(), t)
}

/// Cell counterpart of [`norm_lt`] with the Frobenius norm per cell.
pub fn norm_lt_cells(cells: &CellArray, t: f64, region: Option<&Region>) -> f64 {
    let idx: Vec<usize> = match region {
        Some(r) => r.cells(&cells.grid),
        None => (0..cells.grid.n_cells()).collect(),
    };
    let mags = idx.into_iter().map(|c| cells.cell_norm2(c).sqrt());
    lt_from_magnitudes(mags, cells.grid.cell_volume(), t)
}

/// Mean-normalized norm `(mean |v|^t)^{1/t}`.
pub fn mean_norm(values: &[f64], t: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = numerics::sum(values.iter().map(|v| v.abs().powf(t)));
    (m / values.len() as f64).powf(1.0 / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_1d(n: usize, f: impl Fn(f64) -> f64) -> DiscreteField {
        let g = Grid::new(1, n).unwrap();
        DiscreteField::from_fn(&g, 1, |x, out| out[0] = f(x[0])).unwrap()
    }

    #[test]
    fn gradient_of_affine_and_quadratic() {
        let u = field_1d(9, |x| x);
        assert!(discrete_gradient(&u).values.iter().all(|&g| g == 1.0));
        let u = field_1d(5, |x| x * x);
        let g = discrete_gradient(&u);
        let grid = u.grid();
        for c in 0..grid.n_cells() {
            assert!((g.values[c] - 2.0 * grid.cell_center(c)[0]).abs() < 1e-15);
        }
        let g2 = Grid::new(2, 6).unwrap();
        let u = DiscreteField::from_fn(&g2, 2, |x, o| {
            o[0] = 0.3 - 2.0 * x[0] + 0.5 * x[1];
            o[1] = x[1];
        })
        .unwrap();
        let d = discrete_gradient(&u);
        for c in 0..g2.n_cells() {
            let m = d.cell(c);
            for (got, want) in m.iter().zip([-2.0, 0.5, 0.0, 1.0]) {
                assert!((got - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tau_of_affine_is_constant() {
        let u = field_1d(11, |x| 3.0 * x).as_array();
        let t = tau_shift(&u, 0, 2).unwrap();
        assert_eq!(t.valid.hi[0], 9);
        for ij in t.valid.iter() {
            assert!((t.at(ij)[0] - 3.0 * 2.0 * 0.2).abs() < 1e-14);
        }
        let z = tau_shift(&u, 0, 0).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        assert!(tau_shift(&u, 0, 11).is_err());
    }

    #[test]
    fn second_differences_exact_on_quadratics() {
        let u = field_1d(5, |x| x * x);
        let d2 = discrete_second_differences(&u);
        for ij in d2.valid.iter() {
            assert!((d2.at(ij)[0] - 2.0).abs() < 1e-13);
        }
        let g = Grid::new(2, 7).unwrap();
        let u = DiscreteField::from_fn(&g, 1, |x, o| o[0] = x[0] * x[1]).unwrap();
        let d2 = discrete_second_differences(&u);
        for ij in d2.valid.iter() {
            let m = d2.at(ij);
            assert!(m[0].abs() < 1e-12 && m[3].abs() < 1e-12);
            assert!((m[1] - 1.0).abs() < 1e-12 && (m[2] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_of_constants() {
        let u = field_1d(5, |_| 3.0).as_array();
        assert!((norm_lt(&u, 1.0, None) - 3.0 * 5.0 * 0.5).abs() < 1e-14);
        assert_eq!(norm_lt(&u, f64::INFINITY, None), 3.0);
        let inner = Region::new(0.5).node_box(&u.grid);
        assert_eq!((inner.lo[0], inner.hi[0]), (1, 4));
        assert!((mean_norm(&[2.0, 2.0], 3.0) - 2.0).abs() < 1e-15);
    }
}
