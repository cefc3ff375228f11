//! Explicit time stepping of `u_tt + P_eps u = 0`, its energy, and the
//! domain-of-dependence audit.

pub mod cfl;
pub mod cone;
pub mod energy;
pub mod solver;

use serde::Serialize;

pub use cfl::{cfl_max_step, default_step, CflReport};
pub use cone::{cone_leakage, cutoff_data, CutoffSpec, LeakageEntry, LeakageReport};
pub use energy::{energy, EnergyEntry};
pub use solver::{solve_wave, EnergyReport, Leapfrog, Trajectory, WaveOptions};

/// `(u, u_t)` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl WaveState {
    pub fn new(u: Vec<f64>, v: Vec<f64>, t: f64) -> Self {
        Self { u, v, t }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n], 0.0)
    }
}
