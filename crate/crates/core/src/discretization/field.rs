use super::{DiscretizationError, Grid};

/// Half-open index window `lo <= idx < hi` per axis; axis 1 is `0..1` in 1D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl IndexBox {
    pub fn full(grid: &Grid) -> Self {
        let n = grid.n_axis();
        Self { lo: [0, 0], hi: [n, if grid.dim() == 2 { n } else { 1 }] }
    }

    pub fn interior(grid: &Grid) -> Self {
        let n = grid.n_axis();
        if grid.dim() == 1 {
            Self { lo: [1, 0], hi: [n - 1, 1] }
        } else {
            Self { lo: [1, 1], hi: [n - 1, n - 1] }
        }
    }

    pub fn contains(&self, ij: [usize; 2]) -> bool {
        (0..2).all(|a| ij[a] >= self.lo[a] && ij[a] < self.hi[a])
    }

    pub fn intersect(&self, other: &IndexBox) -> IndexBox {
        let lo = [self.lo[0].max(other.lo[0]), self.lo[1].max(other.lo[1])];
        let hi = [self.hi[0].min(other.hi[0]).max(lo[0]), self.hi[1].min(other.hi[1]).max(lo[1])];
        IndexBox { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo[0] >= self.hi[0] || self.lo[1] >= self.hi[1]
    }

    pub fn iter(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        (self.lo[1]..self.hi[1]).flat_map(move |j| (self.lo[0]..self.hi[0]).map(move |i| [i, j]))
    }
}

/// Node-indexed values with `components` entries per node, meaningful on `valid` only.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeArray {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<f64>,
    pub valid: IndexBox,
}

impl NodeArray {
    pub fn zeros(grid: &Grid, components: usize, valid: IndexBox) -> Self {
        Self { grid: grid.clone(), components, values: vec![0.0; grid.n_nodes() * components], valid }
    }

    pub fn at(&self, ij: [usize; 2]) -> &[f64] {
        let k = self.grid.node_index(ij) * self.components;
        &self.values[k..k + self.components]
    }

    pub fn at_mut(&mut self, ij: [usize; 2]) -> &mut [f64] {
        let k = self.grid.node_index(ij) * self.components;
        &mut self.values[k..k + self.components]
    }
}

/// Vector-valued function on grid nodes with a Dirichlet boundary mask.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
    boundary_mask: Vec<bool>,
}

impl DiscreteField {
    pub fn new(grid: &Grid, components: usize, values: Vec<f64>) -> Result<Self, DiscretizationError> {
        if components == 0 {
            return Err(DiscretizationError::Shape("components >= 1".into()));
        }
        if values.len() != grid.n_nodes() * components {
            return Err(DiscretizationError::Shape(format!(
                "expected {} values, got {}",
                grid.n_nodes() * components,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(DiscretizationError::NonFinite { node: k / components });
        }
        let boundary_mask = (0..grid.n_nodes()).map(|k| grid.is_boundary(k)).collect();
        Ok(Self { grid: grid.clone(), components, values, boundary_mask })
    }

    pub fn zeros(grid: &Grid, components: usize) -> Self {
        Self::new(grid, components, vec![0.0; grid.n_nodes() * components]).expect("zero field")
    }

    /// Samples `f(x, out)` at every node.
    pub fn from_fn<F>(grid: &Grid, components: usize, f: F) -> Result<Self, DiscretizationError>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let mut values = vec![0.0; grid.n_nodes() * components];
        for node in 0..grid.n_nodes() {
            let x = grid.node_point(node);
            f(&x[..grid.dim()], &mut values[node * components..(node + 1) * components]);
        }
        Self::new(grid, components, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn components(&self) -> usize {
        self.components
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn node(&self, node: usize) -> &[f64] {
        &self.values[node * self.components..(node + 1) * self.components]
    }

    /// Mutable access for solver owners; callers keep values finite.
    pub fn node_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node * self.components..(node + 1) * self.components]
    }

    pub fn as_array(&self) -> NodeArray {
        NodeArray {
            grid: self.grid.clone(),
            components: self.components,
            values: self.values.clone(),
            valid: IndexBox::full(&self.grid),
        }
    }

    /// Max-norm distance over all nodes and components.
    pub fn sup_distance(&self, other: &DiscreteField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Whether every boundary node is zero.
    pub fn vanishes_on_boundary(&self) -> bool {
        (0..self.grid.n_nodes())
            .filter(|&k| self.boundary_mask[k])
            .all(|k| self.node(k).iter().all(|&v| v == 0.0))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self, DiscretizationError> {
        Self::new(&self.grid, self.components, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Cell-indexed `N x dim` matrices (row `alpha`, column `axis`), stored row-major per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellArray {
    pub grid: Grid,
    pub components: usize,
    pub values: Vec<f64>,
}

impl CellArray {
    pub fn width(&self) -> usize {
        self.components * self.grid.dim()
    }

    pub fn cell(&self, cell: usize) -> &[f64] {
        let w = self.width();
        &self.values[cell * w..(cell + 1) * w]
    }

    pub fn cell_norm2(&self, cell: usize) -> f64 {
        self.cell(cell).iter().map(|v| v * v).sum()
    }
}
