//! Scalar extension kernels, the constants `C(s)` and `D(s)`, operator-level
//! extension solutions and the trace-derivative limit.

pub mod fuchs;
pub mod gamma;
pub mod kernel;
pub mod quadrature;
pub mod solution;

pub use fuchs::{
    fuchs_roots, fuchsian_residual, indicial_fit, FuchsDiagnostics, FuchsRoots, IndicialFit,
};
pub use gamma::{gamma, ln_gamma};
pub use kernel::{
    constant_c, constant_d, constant_d_closed, theta, theta_deficit, theta_k, ExtensionKernel,
    KernelValue,
};
pub use solution::{
    extension_heat_route, extension_solution, pde_residual, richardson, trace_derivative_limit,
    trace_exponents, ExtensionSolution, PdeResidualReport, TraceLimitReport,
};
