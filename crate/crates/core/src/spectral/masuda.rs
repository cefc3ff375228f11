//! Residual of `-v_xixi - 2 v_etaeta + P v = 0` for `v = exp(i(xi + i eta) sqrt P) u0`,
//! with the `(xi, eta)` derivatives taken by centered differences.

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::geometry::AssembledOperator;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MasudaPoint {
    pub xi: f64,
    pub eta: f64,
    pub residual: f64,
    pub harmonic_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MasudaReport {
    pub points: Vec<MasudaPoint>,
    pub max_residual: f64,
    pub max_harmonic_residual: f64,
    pub eta_min: f64,
    /// `eta_min sqrt(lambda_max) < 1`: the highest kept mode is barely
    /// damped, so truncation error is not suppressed.
    pub eta_too_small: bool,
    pub tail: f64,
}

fn uniform_step(xs: &[f64], name: &str) -> Result<f64> {
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "{name} grid needs at least 3 points"
        )));
    }
    let h = xs[1] - xs[0];
    if !(h > 0.0)
        || xs
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0))
    {
        return Err(Error::InvalidArgument(format!(
            "{name} grid must be increasing and uniform"
        )));
    }
    Ok(h)
}

pub fn masuda_residual(
    spec: &SpectralDecomposition,
    op: &AssembledOperator,
    u0: &[f64],
    xi_grid: &[f64],
    eta_grid: &[f64],
) -> Result<MasudaReport> {
    let dxi = uniform_step(xi_grid, "xi")?;
    let deta = uniform_step(eta_grid, "eta")?;
    if eta_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("eta grid must stay above 0".into()));
    }
    let mc = spec.project(u0)?;
    let k: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    let grid = spec.grid();
    let e = |z: Complex64, kk: f64| (Complex64::i() * z * kk).exp();
    let mut points = Vec::new();
    for i in 1..xi_grid.len() - 1 {
        for j in 1..eta_grid.len() - 1 {
            let (xi, eta) = (xi_grid[i], eta_grid[j]);
            let z = Complex64::new(xi, eta);
            let mut fd = Vec::with_capacity(k.len());
            let mut harm = Vec::with_capacity(k.len());
            let mut center = Vec::with_capacity(k.len());
            for (c, &kk) in mc.coeffs.iter().zip(&k) {
                let v0 = e(z, kk);
                let dxx = (e(z + dxi, kk) - 2.0 * v0 + e(z - dxi, kk)) / (dxi * dxi);
                let dyy = (e(z + Complex64::i() * deta, kk) - 2.0 * v0
                    + e(z - Complex64::i() * deta, kk))
                    / (deta * deta);
                fd.push((-dxx - 2.0 * dyy) * c);
                harm.push((dxx + dyy) * c);
                center.push(v0 * c);
            }
            let v = spec.synthesize_complex(&center);
            let re: Vec<f64> = v.iter().map(|c| c.re).collect();
            let im: Vec<f64> = v.iter().map(|c| c.im).collect();
            let (pre, pim) = (op.apply(&re), op.apply(&im));
            let pv: Vec<Complex64> = pre
                .into_iter()
                .zip(pim)
                .map(|(a, b)| Complex64::new(a, b))
                .collect();
            let lhs: Vec<Complex64> = spec
                .synthesize_complex(&fd)
                .into_iter()
                .zip(&pv)
                .map(|(a, b)| a + b)
                .collect();
            let h = spec.synthesize_complex(&harm);
            let scale = super::complex_norm_w(grid, &pv);
            let rel = |x: &[Complex64]| {
                let n = super::complex_norm_w(grid, x);
                if scale > 0.0 {
                    n / scale
                } else {
                    n
                }
            };
            points.push(MasudaPoint {
                xi,
                eta,
                residual: rel(&lhs),
                harmonic_residual: rel(&h),
            });
        }
    }
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let max_harmonic_residual = points
        .iter()
        .map(|p| p.harmonic_residual)
        .fold(0.0, f64::max);
    let eta_min = eta_grid[1];
    let kmax = k.iter().copied().fold(0.0, f64::max);
    Ok(MasudaReport {
        points,
        max_residual,
        max_harmonic_residual,
        eta_min,
        eta_too_small: eta_min * kmax < 1.0,
        tail: mc.tail,
    })
}
