//! The extension problem for the flat Dirichlet Laplacian: the trace
//! `t^(1-2s) u_t -> C(s) P^s phi` and the Fuchsian diagnostics.
//!
//! ```bash
//! cargo run --release --example fractional_extension
//! ```

use swlab::extension::{extension_solution, fuchsian_residual, trace_derivative_limit};
use swlab::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
use swlab::scenario::smooth_bump;
use swlab::spectral::eigendecomposition;

fn main() -> swlab::Result<()> {
    let grid = build_grid(&[(0.0, 1.0)], &[128])?;
    let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &grid, 0.0)?;
    let spec = eigendecomposition(&op, 128)?;
    let phi = grid.sample(|x| smooth_bump(x, &[0.5], 0.3));

    for s in [0.25, 0.5, 0.75] {
        let sol = extension_solution(&spec, &phi, s, &[0.0, 0.05, 0.2, 1.0])?;
        let norms: Vec<String> = sol
            .u
            .iter()
            .map(|u| format!("{:.4}", grid.norm_w(u)))
            .collect();
        let tl = trace_derivative_limit(&spec, &phi, s, 1e-3, 6)?;
        println!("s = {s}: |u(t)| = [{}]", norms.join(", "));
        println!(
            "        trace limit: raw error {:.2e} at t = {:.1e}, extrapolated {:.2e}",
            tl.raw_rel_error[tl.raw_rel_error.len() - 1],
            tl.t_levels[tl.t_levels.len() - 1],
            tl.rel_error
        );
        let fd = fuchsian_residual(&spec, &phi, s, &[0.1, 0.2, 0.4])?;
        println!(
            "        roots {:?}, h = {}, fitted exponents {:.4} and {:.4}; residual {:.1e} (printed sign: {:.1e})",
            fd.roots.real().expect("real roots"),
            fd.roots.h,
            fd.indicial.leading,
            fd.indicial.subleading,
            fd.max_physical,
            fd.max_printed
        );
    }
    Ok(())
}
