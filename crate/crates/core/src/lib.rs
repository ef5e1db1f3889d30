//! Finite-difference minimization of degenerate p,q-growth integral functionals
//! `F(u) = \int f(x, Du) dx` with radial densities `f(x, xi) = g(x, |xi|)`,
//! together with exact exponent calculus and regularity diagnostics.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod density;
pub mod diagnostics;
pub mod discretization;
pub mod experiments;
pub mod exponents;
pub mod numerics;
pub mod oracle;
pub mod solver;

pub use density::{Coefficient, Density, DensityError, Family};
pub use discretization::{DiscreteField, Grid, WeightRule};
pub use exponents::{ExponentProfile, ExtExponent, GapClass};

