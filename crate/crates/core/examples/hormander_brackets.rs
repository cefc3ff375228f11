//! Bracket-generating check for the preset vector fields.
//!
//! ```bash
//! cargo run --release --example hormander_brackets
//! ```

use swlab::geometry::{bracket_rank, VectorFieldSet};

fn main() -> swlab::Result<()> {
    let cases = [
        ("euclidean", VectorFieldSet::euclidean(2), vec![0.3, -0.2]),
        (
            "heisenberg",
            VectorFieldSet::heisenberg(),
            vec![0.0, 0.0, 0.0],
        ),
        (
            "grushin, off the axis",
            VectorFieldSet::grushin(),
            vec![0.5, 0.0],
        ),
        (
            "grushin, on the axis",
            VectorFieldSet::grushin(),
            vec![0.0, 0.0],
        ),
    ];
    for (name, fields, point) in cases {
        for depth in 1..=2 {
            let r = bracket_rank(&fields, &point, depth)?;
            let words: Vec<String> = r.generators.iter().map(|w| w.to_string()).collect();
            println!(
                "{name:<22} depth {depth}: rank {} of {}  [{}]",
                r.rank,
                fields.dim(),
                words.join(" ")
            );
        }
    }
    Ok(())
}
