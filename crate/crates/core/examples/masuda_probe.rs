//! Holomorphic extension of the half-wave group: residuals of the
//! `(xi, eta)` equation and of harmonicity, with their second-order decay.
//!
//! ```bash
//! cargo run --release --example masuda_probe
//! ```

use swlab::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
use swlab::spectral::{eigendecomposition, masuda_residual};

fn main() -> swlab::Result<()> {
    let grid = build_grid(&[(-3.0, 3.0); 2], &[48, 48])?;
    let op = assemble_sum_of_squares(&VectorFieldSet::grushin(), &grid, 0.0)?;
    let spec = eigendecomposition(&op, 20)?;
    let u0 = grid.sample(|x| (-(x[0] * x[0] + x[1] * x[1]) / 0.25).exp());
    for h in [2e-2, 1e-2, 5e-3] {
        let r = masuda_residual(&spec, &op, &u0, &[-h, 0.0, h], &[0.5 - h, 0.5, 0.5 + h])?;
        println!(
            "step {h:.0e}: residual {:.3e}, harmonic {:.3e}, eta resolves modes: {}",
            r.max_residual, r.max_harmonic_residual, !r.eta_too_small
        );
    }
    Ok(())
}
