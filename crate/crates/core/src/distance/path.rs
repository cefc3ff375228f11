//! Horizontal curves driven by piecewise-constant controls.

use crate::error::{Error, Result};
use crate::geometry::{Grid, VectorFieldSet};

/// `sigma' = sum_j a_j(t) X_j(sigma)` on `[0, 1]` with `a` constant on each
/// piece of `times`.
#[derive(Clone, Debug)]
pub struct ControlPath {
    pub start: Vec<f64>,
    pub times: Vec<f64>,
    pub controls: Vec<Vec<f64>>,
    /// Midpoint steps per piece.
    pub substeps: usize,
}

#[derive(Clone, Debug)]
pub struct PathResult {
    pub energy: f64,
    pub endpoint: Vec<f64>,
    pub trajectory: Vec<Vec<f64>>,
}

impl ControlPath {
    pub fn new(start: Vec<f64>, times: Vec<f64>, controls: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != controls.len() + 1 || times.len() < 2 {
            return Err(Error::InvalidArgument(
                "need one control per time piece".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("control times must increase".into()));
        }
        Ok(Self {
            start,
            times,
            controls,
            substeps: 64,
        })
    }

    /// A single constant control on `[0, 1]`.
    pub fn constant(start: Vec<f64>, control: Vec<f64>) -> Self {
        Self::new(start, vec![0.0, 1.0], vec![control]).expect("valid")
    }

    /// Closed regular `n`-gon of circumradius `radius` traversed
    /// counterclockwise by the first two controls, starting at `start`.
    pub fn polygon_loop(start: Vec<f64>, nfields: usize, radius: f64, n: usize) -> Self {
        let side = 2.0 * radius * (std::f64::consts::PI / n as f64).sin();
        let dt = 1.0 / n as f64;
        let times = (0..=n).map(|k| k as f64 * dt).collect();
        let controls = (0..n)
            .map(|k| {
                let ang = std::f64::consts::PI * (0.5 + (2 * k + 1) as f64 / n as f64);
                let mut a = vec![0.0; nfields];
                a[0] = side / dt * ang.cos();
                a[1] = side / dt * ang.sin();
                a
            })
            .collect();
        Self::new(start, times, controls).expect("valid")
    }

    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    /// `(sum_j int a_j^2 dt)^(1/2)`.
    pub fn energy(&self) -> f64 {
        self.controls
            .iter()
            .zip(self.times.windows(2))
            .map(|(a, w)| a.iter().map(|x| x * x).sum::<f64>() * (w[1] - w[0]))
            .sum::<f64>()
            .sqrt()
    }
}

/// Integrates the path with the explicit midpoint rule. With a grid, the
/// curve must stay inside its box.
pub fn control_path_energy(
    path: &ControlPath,
    fields: &VectorFieldSet,
    grid: Option<&Grid>,
) -> Result<PathResult> {
    let d = fields.dim();
    if path.start.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: path.start.len(),
        });
    }
    if path.controls.iter().any(|a| a.len() != fields.len()) {
        return Err(Error::DimensionMismatch {
            expected: fields.len(),
            got: path
                .controls
                .iter()
                .map(|a| a.len())
                .find(|&l| l != fields.len())
                .unwrap_or(0),
        });
    }
    let velocity = |x: &[f64], a: &[f64], out: &mut Vec<f64>| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (f, aj) in fields.fields().iter().zip(a) {
            if *aj == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(f.eval(x)) {
                *o += aj * c;
            }
        }
    };
    let mut x = path.start.clone();
    let mut traj = vec![x.clone()];
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut mid = vec![0.0; d];
    for (a, w) in path.controls.iter().zip(path.times.windows(2)) {
        let h = (w[1] - w[0]) / path.substeps as f64;
        for step in 0..path.substeps {
            velocity(&x, a, &mut k1);
            for i in 0..d {
                mid[i] = x[i] + 0.5 * h * k1[i];
            }
            velocity(&mid, a, &mut k2);
            for i in 0..d {
                x[i] += h * k2[i];
            }
            if let Some(g) = grid {
                if !g.contains(&x) {
                    return Err(Error::PathLeftBox {
                        t: w[0] + (step + 1) as f64 * h,
                    });
                }
            }
        }
        traj.push(x.clone());
    }
    Ok(PathResult {
        energy: path.energy(),
        endpoint: x,
        trajectory: traj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_constant_controls() {
        let e = VectorFieldSet::euclidean(2);
        let r = control_path_energy(
            &ControlPath::constant(vec![0.3, 0.1], vec![0.0, 0.0]),
            &e,
            None,
        )
        .unwrap();
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.endpoint, vec![0.3, 0.1]);
        let r = control_path_energy(
            &ControlPath::constant(vec![0.0, 0.0], vec![0.6, 0.8]),
            &e,
            None,
        )
        .unwrap();
        assert!((r.energy - 1.0).abs() < 1e-15);
        assert!((r.endpoint[0] - 0.6).abs() < 1e-14 && (r.endpoint[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn heisenberg_loop_lifts_by_its_area() {
        let h = VectorFieldSet::heisenberg();
        let n = 64;
        let radius = 0.5;
        let p = ControlPath::polygon_loop(vec![0.0; 3], 2, radius, n);
        let r = control_path_energy(&p, &h, None).unwrap();
        let area = 0.5 * n as f64 * radius * radius * (2.0 * std::f64::consts::PI / n as f64).sin();
        assert!(r.endpoint[0].abs() < 1e-12 && r.endpoint[1].abs() < 1e-12);
        assert!(
            (r.endpoint[2] - area).abs() < 1e-12,
            "{:?} vs {area}",
            r.endpoint
        );
        let perimeter = 2.0 * n as f64 * radius * (std::f64::consts::PI / n as f64).sin();
        assert!((r.energy - perimeter).abs() < 1e-12);
    }

    #[test]
    fn leaving_the_box_is_an_error() {
        let g = crate::geometry::build_grid(&[(-1.0, 1.0), (-1.0, 1.0)], &[5, 5]).unwrap();
        let p = ControlPath::constant(vec![0.0, 0.0], vec![2.0, 0.0]);
        assert!(matches!(
            control_path_energy(&p, &VectorFieldSet::euclidean(2), Some(&g)),
            Err(Error::PathLeftBox { .. })
        ));
    }
}
