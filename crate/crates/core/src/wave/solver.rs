//! Leapfrog time stepping.

use super::cfl::{cfl_max_step, default_step};
use super::energy::{energy, EnergyEntry};
use super::WaveState;
use crate::error::{Error, Result};
use crate::geometry::AssembledOperator;
use serde::Serialize;

/// Two consecutive levels `(u^n, u^{n+1})` of the leapfrog recursion.
pub struct Leapfrog<'a> {
    op: &'a AssembledOperator,
    dt: f64,
    prev: Vec<f64>,
    cur: Vec<f64>,
    au: Vec<f64>,
    step: usize,
}

impl<'a> Leapfrog<'a> {
    /// Starts from `(u0, v0)` with the Taylor step
    /// `u^1 = u^0 + dt v^0 - dt^2/2 A u^0`.
    pub fn new(op: &'a AssembledOperator, u0: &[f64], v0: &[f64], dt: f64) -> Result<Self> {
        let n = op.len();
        for x in [u0, v0] {
            if x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x.len(),
                });
            }
        }
        let mut au = vec![0.0; n];
        op.apply_into(u0, &mut au);
        let cur = (0..n)
            .map(|i| u0[i] + dt * v0[i] - 0.5 * dt * dt * au[i])
            .collect();
        Ok(Self {
            op,
            dt,
            prev: u0.to_vec(),
            cur,
            au,
            step: 0,
        })
    }

    /// Index `n` of the older level `u^n`.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn older(&self) -> &[f64] {
        &self.prev
    }

    pub fn newer(&self) -> &[f64] {
        &self.cur
    }

    /// `(u^n, u^{n+1}) -> (u^{n+1}, u^{n+2})`; returns the staggered energy
    /// `E^{n+3/2}`.
    pub fn advance(&mut self) -> Result<f64> {
        let dt2 = self.dt * self.dt;
        self.op.apply_into(&self.cur, &mut self.au);
        let mut finite = true;
        for i in 0..self.cur.len() {
            let next = 2.0 * self.cur[i] - self.prev[i] - dt2 * self.au[i];
            finite &= next.is_finite();
            self.prev[i] = next;
        }
        std::mem::swap(&mut self.prev, &mut self.cur);
        self.step += 1;
        if !finite {
            return Err(Error::NonFinite {
                step: self.step + 1,
            });
        }
        Ok(self.staggered_energy_with(&self.au.clone()))
    }

    fn staggered_energy_with(&self, a_older: &[f64]) -> f64 {
        let w = self.op.grid().weight();
        let dt = self.dt;
        let mut kin = 0.0;
        let mut pot = 0.0;
        for i in 0..self.cur.len() {
            let d = (self.cur[i] - self.prev[i]) / dt;
            kin += d * d;
            pot += self.cur[i] * a_older[i];
        }
        w * (kin + pot)
    }

    /// `E^{n+1/2} = |(u^{n+1} - u^n)/dt|^2 + <u^{n+1}, A u^n>`, weighted.
    /// Constant along the recursion.
    pub fn staggered_energy(&self) -> f64 {
        let a_older = self.op.apply(&self.prev);
        self.staggered_energy_with(&a_older)
    }

    /// Swaps the two levels, which reverses the direction of time.
    pub fn reverse(&mut self) {
        std::mem::swap(&mut self.prev, &mut self.cur);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WaveOptions {
    /// Step; default half the stable step. Rounded down so `T/dt` is whole.
    pub dt: Option<f64>,
    pub snapshot_stride: usize,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            dt: None,
            snapshot_stride: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub e0: f64,
    pub max_drift_rel: f64,
    /// Collocated terms at `t = 0`.
    pub initial: EnergyEntry,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<WaveState>,
    /// Staggered energy at each snapshot.
    pub energy_ledger: Vec<f64>,
    pub energy: EnergyReport,
}

impl Trajectory {
    pub fn last(&self) -> &WaveState {
        self.snapshots.last().expect("trajectory has a snapshot")
    }
}

/// Leapfrog solution of `u_tt + A u = 0` on `[0, t_final]`.
pub fn solve_wave(
    op: &AssembledOperator,
    initial: &WaveState,
    t_final: f64,
    opts: WaveOptions,
) -> Result<Trajectory> {
    if !(t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "final time must be >= 0, got {t_final}"
        )));
    }
    let cfl = cfl_max_step(op);
    let dt_req = opts.dt.unwrap_or_else(|| default_step(&cfl, t_final));
    if !(dt_req > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be > 0, got {dt_req}"
        )));
    }
    if dt_req > cfl.dt_max {
        return Err(Error::CflViolation {
            dt: dt_req,
            dt_max: cfl.dt_max,
        });
    }
    let steps = if t_final == 0.0 {
        0
    } else {
        (t_final / dt_req * (1.0 - 1e-12)).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 {
        dt_req
    } else {
        t_final / steps as f64
    };
    let stride = opts.snapshot_stride.max(1);

    let mut lf = Leapfrog::new(op, &initial.u, &initial.v, dt)?;
    let e0 = lf.staggered_energy();
    let mut ledger_max = 0.0f64;
    let mut snapshots = vec![initial.clone()];
    let mut energy_ledger = vec![e0];
    let mut older = initial.u.clone();
    // invariant: lf holds (u^n, u^{n+1}), `older` is u^{n-1}
    for n in 1..=steps {
        older.copy_from_slice(lf.older());
        let e = lf.advance()?;
        ledger_max = ledger_max.max((e - e0).abs());
        if n % stride == 0 || n == steps {
            let v: Vec<f64> = lf
                .newer()
                .iter()
                .zip(&older)
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect();
            snapshots.push(WaveState::new(lf.older().to_vec(), v, n as f64 * dt));
            energy_ledger.push(e);
        }
    }
    let initial_entry = energy(initial, op);
    Ok(Trajectory {
        dt,
        steps,
        snapshots,
        energy_ledger,
        energy: EnergyReport {
            e0,
            max_drift_rel: if e0 > 0.0 {
                ledger_max / e0
            } else {
                ledger_max
            },
            initial: initial_entry,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
    use crate::sparse::{max_abs, norm};
    use crate::spectral::eigendecomposition;

    fn op(fields: VectorFieldSet, bounds: &[(f64, f64)], n: usize, eps: f64) -> AssembledOperator {
        let g = build_grid(bounds, &vec![n; bounds.len()]).unwrap();
        assemble_sum_of_squares(&fields, &g, eps).unwrap()
    }

    fn gauss(op: &AssembledOperator, c: f64, w: f64) -> Vec<f64> {
        op.grid()
            .sample(|x| (-x.iter().map(|y| (y - c) * (y - c)).sum::<f64>() / (w * w)).exp())
    }

    #[test]
    fn zero_data_stays_zero() {
        let a = op(VectorFieldSet::heisenberg(), &[(-1.0, 1.0); 3], 9, 0.0);
        let tr = solve_wave(&a, &WaveState::zeros(a.len()), 1.0, WaveOptions::default()).unwrap();
        assert!(tr
            .snapshots
            .iter()
            .all(|s| max_abs(&s.u) == 0.0 && max_abs(&s.v) == 0.0));
        assert_eq!(tr.snapshots.len(), tr.energy_ledger.len());
    }

    #[test]
    fn eigenmode_oscillates_as_cosine() {
        let a = op(VectorFieldSet::euclidean(1), &[(0.0, 1.0)], 65, 0.0);
        let spec = eigendecomposition(&a, 2).unwrap();
        let (lam, phi) = (spec.eigenvalues()[0], spec.eigenvector(0).to_vec());
        let tr = solve_wave(
            &a,
            &WaveState::new(phi.clone(), vec![0.0; a.len()], 0.0),
            1.0,
            WaveOptions::default(),
        )
        .unwrap();
        let c = (lam.sqrt()).cos();
        let err: Vec<f64> = tr
            .last()
            .u
            .iter()
            .zip(&phi)
            .map(|(u, p)| u - c * p)
            .collect();
        assert!(
            norm(&err) / norm(&phi) < 1e-3,
            "{}",
            norm(&err) / norm(&phi)
        );
    }

    #[test]
    fn pulse_travels_at_unit_speed() {
        let a = op(VectorFieldSet::euclidean(1), &[(-2.0, 2.0)], 801, 0.0);
        let u0 = gauss(&a, 0.0, 0.08);
        let tr = solve_wave(
            &a,
            &WaveState::new(u0, vec![0.0; a.len()], 0.0),
            0.5,
            WaveOptions::default(),
        )
        .unwrap();
        let g = a.grid();
        let (peak, _) = tr
            .last()
            .u
            .iter()
            .enumerate()
            .filter(|(i, _)| g.coords(*i)[0] > 0.0)
            .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        assert!((g.coords(peak)[0] - 0.5).abs() < 2.0 * g.spacing()[0]);
    }

    #[test]
    fn staggered_energy_is_conserved() {
        for f in [VectorFieldSet::grushin(), VectorFieldSet::euclidean(2)] {
            let a = op(f, &[(-1.0, 1.0); 2], 33, 1e-3);
            let u0 = gauss(&a, 0.1, 0.3);
            let cfl = cfl_max_step(&a);
            let opts = WaveOptions {
                dt: Some(0.5 * cfl.dt_max),
                snapshot_stride: 100,
            };
            let tr = solve_wave(
                &a,
                &WaveState::new(u0, vec![0.0; a.len()], 0.0),
                1000.0 * 0.5 * cfl.dt_max,
                opts,
            )
            .unwrap();
            assert_eq!(tr.steps, 1000);
            assert!(
                tr.energy.max_drift_rel < 1e-10,
                "{}",
                tr.energy.max_drift_rel
            );
        }
    }

    #[test]
    fn linear_in_data() {
        let a = op(VectorFieldSet::grushin(), &[(-1.0, 1.0); 2], 21, 0.0);
        let n = a.len();
        let (p, q) = (gauss(&a, 0.2, 0.3), gauss(&a, -0.3, 0.2));
        let run = |u: Vec<f64>, v: Vec<f64>| {
            solve_wave(&a, &WaveState::new(u, v, 0.0), 0.7, WaveOptions::default())
                .unwrap()
                .last()
                .u
                .clone()
        };
        let r1 = run(p.clone(), q.clone());
        let r2 = run(q.clone(), vec![0.0; n]);
        let mix = run(
            p.iter().zip(&q).map(|(x, y)| 2.0 * x - 3.0 * y).collect(),
            q.iter().map(|y| 2.0 * y).collect(),
        );
        let want: Vec<f64> = r1.iter().zip(&r2).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
        let diff: Vec<f64> = mix.iter().zip(&want).map(|(x, y)| x - y).collect();
        assert!(norm(&diff) <= 1e-10 * norm(&want));
    }

    #[test]
    fn reversal_returns_initial_data() {
        let a = op(VectorFieldSet::heisenberg(), &[(-1.0, 1.0); 3], 13, 0.0);
        let u0 = gauss(&a, 0.0, 0.4);
        let v0 = gauss(&a, 0.1, 0.3);
        let dt = 0.5 * cfl_max_step(&a).dt_max;
        let mut lf = Leapfrog::new(&a, &u0, &v0, dt).unwrap();
        for _ in 0..200 {
            lf.advance().unwrap();
        }
        lf.reverse();
        for _ in 0..200 {
            lf.advance().unwrap();
        }
        let diff: Vec<f64> = lf.newer().iter().zip(&u0).map(|(x, y)| x - y).collect();
        assert!(norm(&diff) <= 1e-8 * norm(&u0));
    }

    #[test]
    fn rejects_unstable_step() {
        let a = op(VectorFieldSet::euclidean(1), &[(0.0, 1.0)], 33, 0.0);
        let opts = WaveOptions {
            dt: Some(1.5 * cfl_max_step(&a).dt_max),
            snapshot_stride: 1,
        };
        let r = solve_wave(&a, &WaveState::zeros(a.len()), 1.0, opts);
        assert!(matches!(r, Err(Error::CflViolation { .. })));
    }
}
