use super::DiscretizationError;

/// Tensor grid on `[-1,1]^dim` with `n` nodes per axis, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(dim: usize, n_nodes: usize) -> Result<Self, DiscretizationError> {
        if !(dim == 1 || dim == 2) {
            return Err(DiscretizationError::Grid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n_nodes < 3 {
            return Err(DiscretizationError::Grid(format!("n_nodes >= 3, got {n_nodes}")));
        }
        Ok(Self { dim, n: n_nodes, spacing: 2.0 / (n_nodes - 1) as f64 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_axis(&self) -> usize {
        self.n
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn n_nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }
    pub fn n_cells(&self) -> usize {
        (self.n - 1).pow(self.dim as u32)
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }
    /// Node volume used by node-based sums; equals the cell volume.
    pub fn node_volume(&self) -> f64 {
        self.cell_volume()
    }

    /// Coordinate of index `i` along any axis; exact at both endpoints and at the centre.
    pub fn coord(&self, i: usize) -> f64 {
        (2 * i as i64 - (self.n as i64 - 1)) as f64 / (self.n - 1) as f64
    }

    pub fn node_multi(&self, node: usize) -> [usize; 2] {
        if self.dim == 1 {
            [node, 0]
        } else {
            [node % self.n, node / self.n]
        }
    }

    pub fn node_index(&self, ij: [usize; 2]) -> usize {
        ij[0] + self.n * ij[1]
    }

    pub fn node_point(&self, node: usize) -> [f64; 2] {
        let [i, j] = self.node_multi(node);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let [i, j] = self.node_multi(node);
        let edge = |k: usize| k == 0 || k == self.n - 1;
        edge(i) || (self.dim == 2 && edge(j))
    }

    pub fn cell_multi(&self, cell: usize) -> [usize; 2] {
        if self.dim == 1 {
            [cell, 0]
        } else {
            [cell % (self.n - 1), cell / (self.n - 1)]
        }
    }

    pub fn cell_index(&self, ij: [usize; 2]) -> usize {
        ij[0] + (self.n - 1) * ij[1]
    }

    /// Corner nodes: `(i,j), (i+1,j), (i,j+1), (i+1,j+1)`; only the first two in 1D.
    pub fn cell_corners(&self, cell: usize) -> [usize; 4] {
        let [i, j] = self.cell_multi(cell);
        let n0 = self.node_index([i, j]);
        if self.dim == 1 {
            [n0, n0 + 1, 0, 0]
        } else {
            [n0, n0 + 1, n0 + self.n, n0 + self.n + 1]
        }
    }

    pub fn corners_per_cell(&self) -> usize {
        1 << self.dim
    }

    pub fn cell_bounds(&self, cell: usize) -> ([f64; 2], [f64; 2]) {
        let [i, j] = self.cell_multi(cell);
        if self.dim == 1 {
            ([self.coord(i), 0.0], [self.coord(i + 1), 0.0])
        } else {
            ([self.coord(i), self.coord(j)], [self.coord(i + 1), self.coord(j + 1)])
        }
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let (lo, hi) = self.cell_bounds(cell);
        let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        if self.dim == 1 {
            [c[0], 0.0]
        } else {
            c
        }
    }

    /// Gradient stencil of axis `axis` over the cell corners.
    pub fn gradient_stencil(&self, axis: usize) -> [f64; 4] {
        let h = self.spacing;
        match (self.dim, axis) {
            (1, _) => [-1.0 / h, 1.0 / h, 0.0, 0.0],
            (_, 0) => {
                let w = 0.5 / h;
                [-w, w, -w, w]
            }
            _ => {
                let w = 0.5 / h;
                [-w, -w, w, w]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_endpoints() {
        let g = Grid::new(1, 5).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coord(0), -1.0);
        assert_eq!(g.coord(2), 0.0);
        assert_eq!(g.coord(4), 1.0);
        assert!(Grid::new(3, 5).is_err());
        assert!(Grid::new(1, 2).is_err());
    }

    #[test]
    fn indexing_round_trips() {
        let g = Grid::new(2, 4).unwrap();
        for node in 0..g.n_nodes() {
            assert_eq!(g.node_index(g.node_multi(node)), node);
        }
        for cell in 0..g.n_cells() {
            assert_eq!(g.cell_index(g.cell_multi(cell)), cell);
        }
        assert_eq!(g.cell_corners(4), [5, 6, 9, 10]);
        assert_eq!((0..g.n_nodes()).filter(|&k| g.is_boundary(k)).count(), 12);
    }
}
