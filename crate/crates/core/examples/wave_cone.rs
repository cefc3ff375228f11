//! Finite propagation speed: data vanishing on a metric ball stay zero
//! inside the shrinking cone, for the flat and the Heisenberg wave equations.
//!
//! ```bash
//! cargo run --release --example wave_cone
//! ```

use swlab::distance::{flow_reference_error, riemannian_distance_field, ConeSpec};
use swlab::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
use swlab::scenario::smooth_bump;
use swlab::wave::{cone_leakage, cutoff_data, solve_wave, WaveOptions, WaveState};

fn audit(name: &str, fields: VectorFieldSet, n: usize, half: f64) -> swlab::Result<()> {
    let d = fields.dim();
    let grid = build_grid(&vec![(-half, half); d], &vec![n; d])?;
    let op = assemble_sum_of_squares(&fields, &grid, 0.0)?;
    let src = grid.nearest_node(&vec![0.0; d]).expect("origin");
    let dist = riemannian_distance_field(&grid, &fields, 1e-3, src, 2)?;
    let (t0, delta) = (0.6, 0.1);
    let margin = 2.0 * flow_reference_error(&dist, &fields, t0)?;

    let mut c = vec![0.0; d];
    c[0] = 1.0;
    let u0 = grid.sample(|x| smooth_bump(x, &c, 0.4));
    let (a, b, cut) = cutoff_data(&u0, &vec![0.0; grid.len()], &dist, t0, delta)?;
    let traj = solve_wave(
        &op,
        &WaveState::new(a, b, 0.0),
        cut.inner,
        WaveOptions::default(),
    )?;
    let rep = cone_leakage(&traj, &dist, &ConeSpec::new(cut.inner, src, margin)?);
    println!(
        "{name:<11} n = {n:<4} steps {:<4} margin {:.3}  leakage {:.3e}  energy drift {:.1e}",
        traj.steps, margin, rep.ratio, traj.energy.max_drift_rel
    );
    Ok(())
}

fn main() -> swlab::Result<()> {
    for n in [257, 513, 1025] {
        audit("flat 1D", VectorFieldSet::euclidean(1), n, 2.5)?;
    }
    for n in [65, 129] {
        audit("flat 2D", VectorFieldSet::euclidean(2), n, 2.5)?;
    }
    for n in [33, 49] {
        audit("heisenberg", VectorFieldSet::heisenberg(), n, 1.5)?;
    }
    Ok(())
}
