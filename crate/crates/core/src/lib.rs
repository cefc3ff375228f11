//! Numerical laboratory for sums of squares of vector fields: the operator
//! `P = sum X_j^* X_j` on a grid, its sub-Riemannian distance, waves with
//! finite propagation speed, functional calculus, and the fractional
//! extension problem.

pub mod distance;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod io;
pub mod scenario;
pub mod sparse;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
