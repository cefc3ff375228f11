//! Sub-Riemannian distance on the Heisenberg group as the monotone limit of
//! regularized Riemannian distances, checked against control paths.
//!
//! ```bash
//! cargo run --release --example heisenberg_distance
//! ```

use swlab::distance::{
    ball_comparison, control_path_energy, subriemannian_distance, ControlPath,
    RegularizationSchedule, ShellOptions,
};
use swlab::geometry::{build_grid, VectorFieldSet};

fn main() -> swlab::Result<()> {
    let grid = build_grid(&[(-1.5, 1.4375); 3], &[48, 48, 48])?;
    let fields = VectorFieldSet::heisenberg();
    let src = grid
        .nearest_node(&[0.0, 0.0, 0.0])
        .expect("origin is a node");
    let (levels, conv) =
        subriemannian_distance(&grid, &fields, src, &RegularizationSchedule::default(), 2)?;

    let target = grid.nearest_node(&[1.0, 0.0, 0.0]).expect("in the box");
    println!("{:>10} {:>12} {:>12}", "eps", "d(0,e1)", "max incr");
    for (k, f) in levels.iter().enumerate() {
        let inc = if k == 0 {
            0.0
        } else {
            conv.max_increment[k - 1]
        };
        println!(
            "{:>10.3e} {:>12.6} {:>12.4e}",
            f.epsilon, f.values[target], inc
        );
    }
    println!(
        "monotonicity violations: {} (all below tau: {})",
        conv.total_violations(),
        conv.within_tolerance()
    );

    let last = levels.last().expect("levels");
    let vertical = ball_comparison(
        last,
        ShellOptions {
            axis: Some(2),
            ..Default::default()
        },
    )?;
    println!(
        "vertical ball exponent: {:.3} (sqrt scaling expected)",
        vertical.delta
    );

    // a unit square loop lifts to height 1; its control energy bounds the
    // distance from above (exact value sqrt(4 pi) = 3.545)
    let side = 1.0;
    let path = ControlPath::new(
        vec![0.0; 3],
        vec![0.0, 0.25, 0.5, 0.75, 1.0],
        vec![
            vec![4.0 * side, 0.0],
            vec![0.0, 4.0 * side],
            vec![-4.0 * side, 0.0],
            vec![0.0, -4.0 * side],
        ],
    )?;
    let p = control_path_energy(&path, &fields, Some(&grid))?;
    let end = grid.nearest_node(&p.endpoint).expect("in the box");
    println!(
        "square loop: endpoint {:?}, control energy {:.4}, graph distance {:.4}",
        p.endpoint
            .iter()
            .map(|x| (x * 1e6).round() / 1e6)
            .collect::<Vec<_>>(),
        p.energy,
        last.values[end]
    );
    Ok(())
}
