//! Metric balls, their comparison with Euclidean balls, and cone slices.

use super::field::DistanceField;
use super::path::{control_path_energy, ControlPath};
use crate::error::{Error, Result};
use crate::geometry::VectorFieldSet;
use serde::Serialize;

/// Nodes with `d(x) < rho`.
pub fn ball_mask(dist: &DistanceField, rho: f64) -> Vec<bool> {
    dist.values.iter().map(|&v| v < rho).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct BallComparison {
    /// Fitted exponent of `max d ~ rho^delta` over Euclidean shells.
    pub delta: f64,
    /// `max_shell (max d) / rho^delta`.
    pub m_upper: f64,
    /// `max_x |x - x0| / d(x)`.
    pub m_lower: f64,
    pub shells: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ShellOptions {
    /// Restrict to the line through the source parallel to this axis.
    pub axis: Option<usize>,
    /// Smallest shell radius, default `8 h`: below that the stencil does not
    /// resolve sub-Riemannian balls.
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
}

/// Regresses `log max_{|x-x0| ~ rho} d(x)` on `log rho`.
pub fn ball_comparison(dist: &DistanceField, opts: ShellOptions) -> Result<BallComparison> {
    let g = &dist.grid;
    let x0 = g.coords(dist.source);
    let m0 = g.multi_index(dist.source);
    let hmax = g.spacing().iter().copied().fold(0.0, f64::max);
    let reach = (0..g.dim())
        .filter(|&a| opts.axis.is_none_or(|ax| ax == a))
        .map(|a| (x0[a] - g.origin()[a]).max(g.upper()[a] - x0[a]))
        .fold(0.0, f64::max);
    let rho_min = opts.rho_min.unwrap_or(8.0 * hmax);
    let rho_max = opts.rho_max.unwrap_or(0.8 * reach);

    let mut shells: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    let mut m_lower = 0.0f64;
    for i in 0..g.len() {
        let d = dist.values[i];
        if !d.is_finite() || i == dist.source {
            continue;
        }
        let m = g.multi_index(i);
        if let Some(ax) = opts.axis {
            if (0..g.dim()).any(|a| a != ax && m[a] != m0[a]) {
                continue;
            }
        }
        let x = g.coords(i);
        let rho = x
            .iter()
            .zip(&x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if d > 0.0 {
            m_lower = m_lower.max(rho / d);
        }
        if rho < rho_min || rho > rho_max {
            continue;
        }
        let bin = (rho / hmax).round() as i64;
        let e = shells.entry(bin).or_insert((bin as f64 * hmax, 0.0));
        e.1 = e.1.max(d);
    }
    let shells: Vec<(f64, f64)> = shells.into_values().filter(|s| s.1 > 0.0).collect();
    if shells.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "ball comparison needs 3 shells, found {}",
            shells.len()
        )));
    }
    let n = shells.len() as f64;
    let (sx, sy) = shells
        .iter()
        .fold((0.0, 0.0), |(a, b), (r, d)| (a + r.ln(), b + d.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = shells.iter().fold((0.0, 0.0), |(a, b), (r, d)| {
        let (u, v) = (r.ln() - mx, d.ln() - my);
        (a + u * v, b + u * u)
    });
    let delta = sxy / sxx;
    let m_upper = shells
        .iter()
        .map(|(r, d)| d / r.powf(delta))
        .fold(0.0, f64::max);
    Ok(BallComparison {
        delta,
        m_upper,
        m_lower,
        shells,
    })
}

/// `{(t, x) : d(x) < t0 - t - margin}`.
#[derive(Clone, Debug, Serialize)]
pub struct ConeSpec {
    pub t0: f64,
    pub source: usize,
    pub margin: f64,
}

impl ConeSpec {
    pub fn new(t0: f64, source: usize, margin: f64) -> Result<Self> {
        if !(t0 > 0.0) || !(margin >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cone needs t0 > 0 and margin >= 0 (got {t0}, {margin})"
            )));
        }
        Ok(Self { t0, source, margin })
    }

    pub fn radius_at(&self, t: f64) -> f64 {
        self.t0 - t - self.margin
    }

    pub fn slice(&self, dist: &DistanceField, t: f64) -> Vec<bool> {
        ball_mask(dist, self.radius_at(t))
    }
}

/// Distance error along the integral curve of the first field: flowing
/// `X_1` from the source for time `length` costs exactly `length`, and for
/// fields where only `X_1` moves the first coordinate that is also the
/// distance. Returns `max(h, |d(end) - length|)`.
pub fn flow_reference_error(
    dist: &DistanceField,
    fields: &VectorFieldSet,
    length: f64,
) -> Result<f64> {
    let grid = &dist.grid;
    let hmax = grid.spacing().iter().cloned().fold(0.0, f64::max);
    let mut control = vec![0.0; fields.len()];
    control[0] = length;
    let path = ControlPath::constant(grid.coords(dist.source), control);
    let end = control_path_energy(&path, fields, Some(grid))?.endpoint;
    let node = grid
        .nearest_node(&end)
        .ok_or_else(|| Error::InvalidArgument("reference point outside the grid".into()))?;
    Ok(hmax.max((dist.values[node] - length).abs()))
}
