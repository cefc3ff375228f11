//! Scalar extension kernels and the constants `D(s)`, `C(s)`.
//!
//! ```bash
//! cargo run --release --example extension_kernels
//! ```

use swlab::extension::{constant_c, constant_d, constant_d_closed, theta, theta_k};

fn main() -> swlab::Result<()> {
    println!(
        "{:>5} {:>16} {:>16} {:>12}",
        "s", "D(s)", "4^(1-s)G(1-s)", "C(s)"
    );
    for s in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!(
            "{s:>5} {:>16.12} {:>16.12} {:>12.8}",
            constant_d(s)?.value,
            constant_d_closed(s),
            constant_c(s)?.value
        );
    }
    println!();
    println!("theta(1, t) for s = 1/2 against exp(-t):");
    for t in [0.1, 1.0, 3.0] {
        let v = theta(1.0, t, 0.5)?;
        println!(
            "  t = {t}: {:.15} vs {:.15} (quadrature error estimate {:.1e})",
            v.value,
            (-t).exp(),
            v.abs_err
        );
    }
    println!(
        "t theta_t(1, 1) for s = 1/2: {:.12} (expected -exp(-1))",
        theta_k(1.0, 1.0, 0.5, 1)?.value
    );
    Ok(())
}
