//! Grids, polynomial vector fields and the assembled sum-of-squares operator.

pub mod bracket;
pub mod fields;
pub mod grid;
pub mod operator;
pub mod poly;

pub use bracket::{bracket_rank, BracketReport, BracketWord};
pub use fields::{FieldTerm, Preset, VectorField, VectorFieldSet, PRESET_CATALOG};
pub use grid::{build_grid, Boundary, Grid};
pub use operator::{
    assemble_sum_of_squares, assemble_vector_field, h1x_norm, AssembledOperator, DiscreteField,
};
pub use poly::Poly;
