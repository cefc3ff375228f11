//! Cutoff of initial data and the domain-of-dependence audit.

use super::solver::Trajectory;
use crate::distance::{ConeSpec, DistanceField};
use crate::error::{Error, Result};
use crate::sparse::max_abs;
use serde::Serialize;

/// `chi = 0` for `d <= inner`, `1` for `d >= outer`, quintic ramp between.
#[derive(Clone, Debug, Serialize)]
pub struct CutoffSpec {
    pub inner: f64,
    pub outer: f64,
    pub order: u32,
}

impl CutoffSpec {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::InvalidArgument(format!(
                "cutoff radii inverted: inner {inner}, outer {outer}"
            )));
        }
        Ok(Self {
            inner,
            outer,
            order: 5,
        })
    }

    pub fn chi(&self, d: f64) -> f64 {
        if d <= self.inner {
            return 0.0;
        }
        if d >= self.outer {
            return 1.0;
        }
        let r = (d - self.inner) / (self.outer - self.inner);
        r * r * r * (10.0 + r * (-15.0 + 6.0 * r))
    }

    pub fn evaluate(&self, dist: &DistanceField) -> Vec<f64> {
        dist.values.iter().map(|&d| self.chi(d)).collect()
    }
}

/// Multiplies both data by `chi` with inner radius `t0 - delta/2` and outer
/// radius `t0`.
pub fn cutoff_data(
    u0: &[f64],
    u1: &[f64],
    dist: &DistanceField,
    t0: f64,
    delta: f64,
) -> Result<(Vec<f64>, Vec<f64>, CutoffSpec)> {
    if !(delta > 0.0) || !(t0 - delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cutoff needs delta > 0 and t0 - delta > 0 (got {t0}, {delta})"
        )));
    }
    if u0.len() != dist.values.len() || u1.len() != dist.values.len() {
        return Err(Error::DimensionMismatch {
            expected: dist.values.len(),
            got: u0.len().min(u1.len()),
        });
    }
    let spec = CutoffSpec::new(t0 - 0.5 * delta, t0)?;
    let chi = spec.evaluate(dist);
    let a = u0.iter().zip(&chi).map(|(u, c)| u * c).collect();
    let b = u1.iter().zip(&chi).map(|(u, c)| u * c).collect();
    Ok((a, b, spec))
}

#[derive(Clone, Debug, Serialize)]
pub struct LeakageEntry {
    pub t: f64,
    pub cone_sup: f64,
    pub global_sup: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeakageReport {
    /// Initial data vanish on the apex ball.
    pub valid: bool,
    pub initial_ball_max: f64,
    pub initial_peak: f64,
    pub entries: Vec<LeakageEntry>,
    /// `max_t cone_sup / global_sup`.
    pub ratio: f64,
}

/// `sup |u|` on `{d < t0 - t - margin}` relative to `sup |u|`, per snapshot.
/// The data must vanish on `{d < t0}`; after `cutoff_data` that ball is the
/// cutoff's inner radius.
pub fn cone_leakage(traj: &Trajectory, dist: &DistanceField, cone: &ConeSpec) -> LeakageReport {
    let first = &traj.snapshots[0];
    let peak = max_abs(&first.u).max(max_abs(&first.v));
    let ball_max = dist
        .values
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < cone.t0)
        .map(|(i, _)| first.u[i].abs().max(first.v[i].abs()))
        .fold(0.0, f64::max);
    let valid = ball_max <= 1e-12 * peak;
    let entries: Vec<LeakageEntry> = traj
        .snapshots
        .iter()
        .map(|s| {
            let r = cone.radius_at(s.t);
            let global_sup = max_abs(&s.u);
            let cone_sup = if r > 0.0 {
                s.u.iter()
                    .zip(&dist.values)
                    .filter(|(_, &d)| d < r)
                    .map(|(u, _)| u.abs())
                    .fold(0.0, f64::max)
            } else {
                0.0
            };
            LeakageEntry {
                t: s.t,
                cone_sup,
                global_sup,
                ratio: if global_sup > 0.0 {
                    cone_sup / global_sup
                } else {
                    0.0
                },
            }
        })
        .collect();
    let ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    LeakageReport {
        valid,
        initial_ball_max: ball_max,
        initial_peak: peak,
        entries,
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::riemannian_distance_field;
    use crate::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
    use crate::wave::{solve_wave, WaveOptions, WaveState};

    #[test]
    fn ramp_endpoints_and_midpoint() {
        let c = CutoffSpec::new(0.4, 0.6).unwrap();
        assert_eq!(c.chi(0.4), 0.0);
        assert_eq!(c.chi(0.6), 1.0);
        assert!((c.chi(0.5) - 0.5).abs() < 1e-15);
        assert!(CutoffSpec::new(0.6, 0.4).is_err());
    }

    #[test]
    fn leakage_shrinks_with_margin() {
        let g = build_grid(&[(-2.0, 2.0)], &[257]).unwrap();
        let f = VectorFieldSet::euclidean(1);
        let op = assemble_sum_of_squares(&f, &g, 0.0).unwrap();
        let src = g.nearest_node(&[0.0]).unwrap();
        let dist = riemannian_distance_field(&g, &f, 1e-12, src, 1).unwrap();
        let u0 = g.sample(|x| (-(x[0] - 1.1).powi(2) * 20.0).exp());
        assert!(cutoff_data(&u0, &u0, &dist, 0.5, 0.6).is_err());
        let (a, b, _) = cutoff_data(&u0, &vec![0.0; g.len()], &dist, 0.6, 0.1).unwrap();
        assert!(a
            .iter()
            .zip(&dist.values)
            .all(|(u, d)| *d > 0.55 || *u == 0.0));
        let tr = solve_wave(&op, &WaveState::new(a, b, 0.0), 0.6, WaveOptions::default()).unwrap();
        let mut last = f64::INFINITY;
        for m in [0.0, 0.02, 0.05, 0.1] {
            let rep = cone_leakage(&tr, &dist, &ConeSpec::new(0.55, src, m).unwrap());
            assert!(rep.valid && rep.ratio <= last);
            last = rep.ratio;
        }
        assert!(last < 1e-6);

        let zero =
            solve_wave(&op, &WaveState::zeros(g.len()), 0.6, WaveOptions::default()).unwrap();
        assert_eq!(
            cone_leakage(&zero, &dist, &ConeSpec::new(0.6, src, 0.0).unwrap()).ratio,
            0.0
        );
    }
}
