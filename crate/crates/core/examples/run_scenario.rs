//! Drives the scenario runner from code, as the `swlab` binary does.
//!
//! ```bash
//! cargo run --release --example run_scenario -- crates/core/configs/kernels.toml
//! ```

use swlab::scenario::{emit_report, parse_config, run_scenario};

fn main() -> swlab::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/configs/kernels.toml".into());
    let config = parse_config(&std::fs::read_to_string(&path)?)?;
    let report = run_scenario(&config)?;
    for c in &report.checks {
        println!(
            "{} {:<32} {:e}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value
        );
    }
    let dir = std::env::temp_dir().join("swlab-example");
    let files = emit_report(&report, &dir)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}
