//! Distances of the regularized metrics `P - eps Delta` and their monotone
//! limit, horizontal control paths, and ball diagnostics.

pub mod balls;
pub mod cometric;
pub mod field;
pub mod path;

pub use balls::{
    ball_comparison, ball_mask, flow_reference_error, BallComparison, ConeSpec, ShellOptions,
};
pub use cometric::{cometric_at, segment_length};
pub use field::{
    riemannian_distance_field, stencil_offsets, subriemannian_distance, ConvergenceReport,
    DistanceField, RegularizationSchedule,
};
pub use path::{control_path_energy, ControlPath, PathResult};
