//! Stable step of the explicit scheme.

use crate::geometry::AssembledOperator;
use crate::sparse::{dot, norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const POWER_ITERS: usize = 100;
const SAFETY: f64 = 1.01;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CflReport {
    pub lambda_max: f64,
    pub dt_max: f64,
    /// `"power"` or `"gershgorin"`.
    pub source: &'static str,
}

/// `dt_max = 2 / sqrt(lambda_max)`. `lambda_max` comes from 100 power
/// iterations inflated by 1%, capped by (and falling back to) the
/// Gershgorin bound. A zero operator gives an infinite step.
pub fn cfl_max_step(op: &AssembledOperator) -> CflReport {
    let a = op.matrix();
    let gersh = a.gershgorin_bound();
    if gersh == 0.0 {
        return CflReport {
            lambda_max: 0.0,
            dt_max: f64::INFINITY,
            source: "gershgorin",
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xcf1);
    let mut x: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev = 0.0;
    let mut rq = 0.0;
    for _ in 0..POWER_ITERS {
        let y = a.mul_vec(&x);
        prev = rq;
        rq = dot(&x, &y);
        let ny = norm(&y);
        if ny == 0.0 {
            break;
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    let settled = rq > 0.0 && (rq - prev).abs() <= 1e-3 * rq;
    let (lambda_max, source) = if settled {
        ((SAFETY * rq).min(gersh), "power")
    } else {
        (gersh, "gershgorin")
    };
    CflReport {
        lambda_max,
        dt_max: 2.0 / lambda_max.sqrt(),
        source,
    }
}

/// Default step: half the stable step, or `T/10` for a zero operator.
pub fn default_step(cfl: &CflReport, t_final: f64) -> f64 {
    if cfl.dt_max.is_finite() {
        0.5 * cfl.dt_max
    } else {
        t_final / 10.0
    }
}
