//! Uniform grids on `[-1,1]^dim`, node fields, difference operators, the
//! discrete energy and field serialization.

mod energy;
mod field;
mod grid;
pub mod io;
mod operators;

pub use energy::{BandMatrix, CellIntegrand, CellPhases, DiscreteProblem, Radial};
pub use field::{CellArray, DiscreteField, IndexBox, NodeArray};
pub use grid::Grid;
pub use operators::{
    axis_difference, discrete_gradient, discrete_second_differences, inner_product, mean_norm,
    norm_lt, norm_lt_cells, tau_shift, Region,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("unsupported grid: {0}")]
    Grid(String),
    #[error("field shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite field value at node {node}")]
    NonFinite { node: usize },
    #[error("shift of {steps} steps along axis {axis} exceeds the grid")]
    ShiftOutOfRange { axis: usize, steps: isize },
    #[error("density is not finite in cell {cell} (weight singular at a quadrature point)")]
    QuadratureSingularity { cell: usize },
    #[error("field file: {0}")]
    Io(String),
}

/// How a spatial coefficient is reduced to one value per cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// Value at the cell centre (midpoint rule).
    #[default]
    CellCenter,
    /// `|cell| / \int_cell 1/a`; reproduces the exact flux of 1D weighted problems.
    Harmonic,
}
