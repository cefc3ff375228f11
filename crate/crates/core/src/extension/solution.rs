//! Operator-level extension `u(t) = theta(P, t) phi`, computed modally.

use super::kernel::{constant_c, ExtensionKernel};
use crate::error::{Error, Result};
use crate::geometry::AssembledOperator;
use crate::spectral::{fractional_power, heat_semigroup, SpectralDecomposition};
use rayon::prelude::*;
use serde::Serialize;

/// Absolute tolerance asked of every kernel evaluation.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ExtensionSolution {
    pub s: f64,
    pub t_values: Vec<f64>,
    /// `u(t_k, .)` for each `t_k`.
    pub u: Vec<Vec<f64>>,
    /// Modal coefficients of `phi`.
    pub coeffs: Vec<f64>,
    /// Weighted norm of the part of `phi` outside the computed modes.
    pub tail: f64,
    /// Largest kernel quadrature error estimate.
    pub kernel_err: f64,
}

/// `theta_k(lambda_i, t_j)` for every computed mode and every `t`, row per `t`.
pub(crate) fn kernel_table(
    spec: &SpectralDecomposition,
    kernel: &ExtensionKernel,
    ts: &[f64],
    k: usize,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let m = spec.len();
    let cells: Vec<Result<(f64, f64)>> = (0..ts.len() * m)
        .into_par_iter()
        .map(|c| {
            let v = kernel.theta_k(spec.lambda(c % m), ts[c / m], k)?;
            Ok((v.checked(KERNEL_TOL)?, v.abs_err))
        })
        .collect();
    let mut table = vec![vec![0.0; m]; ts.len()];
    let mut err = 0.0f64;
    for (c, r) in cells.into_iter().enumerate() {
        let (v, e) = r?;
        table[c / m][c % m] = v;
        err = err.max(e);
    }
    Ok((table, err))
}

fn check_times(ts: &[f64], strict: bool) -> Result<()> {
    for &t in ts {
        let ok = if strict { t > 0.0 } else { t >= 0.0 };
        if !ok || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "extension time {t} out of range"
            )));
        }
    }
    Ok(())
}

pub fn extension_solution(
    spec: &SpectralDecomposition,
    phi: &[f64],
    s: f64,
    t_list: &[f64],
) -> Result<ExtensionSolution> {
    check_times(t_list, false)?;
    let kernel = ExtensionKernel::new(s)?;
    let mc = spec.project(phi)?;
    let (table, kernel_err) = kernel_table(spec, &kernel, t_list, 0)?;
    let u = table
        .iter()
        .map(|row| {
            let c: Vec<f64> = row.iter().zip(&mc.coeffs).map(|(k, c)| k * c).collect();
            spec.synthesize(&c)
        })
        .collect();
    Ok(ExtensionSolution {
        s,
        t_values: t_list.to_vec(),
        u,
        coeffs: mc.coeffs,
        tail: mc.tail,
        kernel_err,
    })
}

/// The same `u(t)` through the heat semigroup:
/// `Gamma(s)^-1 int_0^inf P^s e^(-tau P) phi e^(-t^2/(4 tau)) tau^(s-1) dtau`,
/// with the trapezoid rule in `y = ln tau`. Meant for a handful of modes.
pub fn extension_heat_route(
    spec: &SpectralDecomposition,
    phi: &[f64],
    s: f64,
    t: f64,
) -> Result<Vec<f64>> {
    check_times(&[t], true)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "s must lie in (0,1), got {s}"
        )));
    }
    let lmin = (0..spec.len())
        .map(|i| spec.lambda(i))
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !lmin.is_finite() {
        return Err(Error::InvalidArgument(
            "heat route needs a positive eigenvalue".into(),
        ));
    }
    // integrand in y: exp(s y - lambda e^y - t^2 e^-y / 4), analytic in a
    // strip of half-width pi/2, so the trapezoid error is ~exp(-pi^2 / hy)
    let hy = 0.1;
    let y_lo = (t * t / 4.0 / 60.0).ln();
    let y_hi = (60.0 / lmin).ln();
    let nodes = ((y_hi - y_lo) / hy).ceil() as usize;
    let g = crate::extension::gamma::gamma(s);
    let mut acc = vec![0.0; phi.len()];
    for k in 0..=nodes {
        let y = y_lo + k as f64 * hy;
        let tau = y.exp();
        let heat = heat_semigroup(spec, phi, tau)?.values;
        let ps = fractional_power(spec, &heat, s)?.values;
        let w = hy * (s * y - t * t / (4.0 * tau)).exp() / g;
        let w = if k == 0 || k == nodes { 0.5 * w } else { w };
        for (a, p) in acc.iter_mut().zip(&ps) {
            *a += w * p;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeResidualPoint {
    pub t: f64,
    pub residual: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeResidualReport {
    pub s: f64,
    pub points: Vec<PdeResidualPoint>,
    pub max_relative: f64,
}

/// `u_tt + (1-2s)/t u_t - P u` at the interior `t` values, with
/// three-point differences in `t` and `P` applied as a matrix.
pub fn pde_residual(sol: &ExtensionSolution, op: &AssembledOperator) -> Result<PdeResidualReport> {
    let ts = &sol.t_values;
    if ts.len() < 3 {
        return Err(Error::InvalidArgument(
            "residual needs at least 3 extension times".into(),
        ));
    }
    check_times(ts, true)?;
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "extension times must increase".into(),
        ));
    }
    let grid = op.grid();
    let a = 1.0 - 2.0 * sol.s;
    let mut points = Vec::new();
    for j in 1..ts.len() - 1 {
        let (h0, h1) = (ts[j] - ts[j - 1], ts[j + 1] - ts[j]);
        let (um, u0, up) = (&sol.u[j - 1], &sol.u[j], &sol.u[j + 1]);
        let pu = op.apply(u0);
        let r: Vec<f64> = (0..u0.len())
            .map(|i| {
                let d1 = (h0 * h0 * up[i] - h1 * h1 * um[i] + (h1 * h1 - h0 * h0) * u0[i])
                    / (h0 * h1 * (h0 + h1));
                let d2 =
                    2.0 * (h0 * up[i] - (h0 + h1) * u0[i] + h1 * um[i]) / (h0 * h1 * (h0 + h1));
                d2 + a / ts[j] * d1 - pu[i]
            })
            .collect();
        let residual = grid.norm_w(&r);
        let scale = grid.norm_w(&pu);
        points.push(PdeResidualPoint {
            t: ts[j],
            residual,
            relative: if scale > 0.0 {
                residual / scale
            } else {
                residual
            },
        });
    }
    let max_relative = points.iter().map(|p| p.relative).fold(0.0, f64::max);
    Ok(PdeResidualReport {
        s: sol.s,
        points,
        max_relative,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceLimitReport {
    pub s: f64,
    pub t_levels: Vec<f64>,
    /// Weighted norm of `t^(1-2s) u_t` at each level.
    pub raw: Vec<f64>,
    /// Relative error of each level before extrapolation.
    pub raw_rel_error: Vec<f64>,
    /// Weighted norm of the extrapolated limit.
    pub extrapolated: f64,
    /// Weighted norm of `C(s) P^s phi`.
    pub reference_norm: f64,
    pub rel_error: f64,
    /// Successive Richardson corrections shrink.
    pub monotone: bool,
    #[serde(skip)]
    pub limit: Vec<f64>,
}

/// Exponents of the small-`t` expansion of `t^(-2s) theta_1`:
/// `2-2s, 2, 4-2s, 4, ...`.
pub fn trace_exponents(s: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let m = 2.0 * (k / 2 + 1) as f64;
            if k % 2 == 0 {
                m - 2.0 * s
            } else {
                m
            }
        })
        .collect()
}

/// Richardson elimination for samples at `t0, t0/2, t0/4, ...` of a
/// quantity `L + sum c_k t^p_k`. Returns the limit and the size of each
/// stage's correction.
pub fn richardson(samples: &[f64], exponents: &[f64]) -> (f64, Vec<f64>) {
    let mut col = samples.to_vec();
    let mut corrections = Vec::new();
    for &p in exponents.iter().take(samples.len().saturating_sub(1)) {
        let f = 2f64.powf(p);
        let next: Vec<f64> = col
            .windows(2)
            .map(|w| (f * w[1] - w[0]) / (f - 1.0))
            .collect();
        corrections.push((next[next.len() - 1] - col[col.len() - 1]).abs());
        col = next;
    }
    (col[col.len() - 1], corrections)
}

/// `lim_{t->0} t^(1-2s) u_t` from `levels` values of `t` halving from `t0`,
/// extrapolated mode by mode, against `C(s) P^s phi`.
pub fn trace_derivative_limit(
    spec: &SpectralDecomposition,
    phi: &[f64],
    s: f64,
    t0: f64,
    levels: usize,
) -> Result<TraceLimitReport> {
    if !(t0 > 0.0) || levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "trace limit needs t0 > 0 and >= 2 levels (got {t0}, {levels})"
        )));
    }
    let kernel = ExtensionKernel::new(s)?;
    let c_s = constant_c(s)?.checked(KERNEL_TOL)?;
    let grid = spec.grid();
    let mc = spec.project(phi)?;
    let ts: Vec<f64> = (0..levels).map(|k| t0 / 2f64.powi(k as i32)).collect();
    let (table, _) = kernel_table(spec, &kernel, &ts, 1)?;
    let exps = trace_exponents(s, levels - 1);
    let m = spec.len();
    let mut limit_c = vec![0.0; m];
    let mut stage = vec![0.0f64; levels - 1];
    for i in 0..m {
        let samples: Vec<f64> = (0..levels)
            .map(|k| table[k][i] / ts[k].powf(2.0 * s))
            .collect();
        let (lim, corr) = richardson(&samples, &exps);
        limit_c[i] = lim * mc.coeffs[i];
        for (a, c) in stage.iter_mut().zip(corr) {
            *a = a.max(c * mc.coeffs[i].abs());
        }
    }
    let reference_c: Vec<f64> = (0..m)
        .map(|i| c_s * spec.lambda(i).powf(s) * mc.coeffs[i])
        .collect();
    let reference = spec.synthesize(&reference_c);
    let reference_norm = grid.norm_w(&reference);
    let rel = |v: &[f64]| {
        let d: Vec<f64> = v.iter().zip(&reference).map(|(a, b)| a - b).collect();
        let n = grid.norm_w(&d);
        if reference_norm > 0.0 {
            n / reference_norm
        } else {
            n
        }
    };
    let mut raw = Vec::new();
    let mut raw_rel_error = Vec::new();
    for k in 0..levels {
        let c: Vec<f64> = (0..m)
            .map(|i| table[k][i] / ts[k].powf(2.0 * s) * mc.coeffs[i])
            .collect();
        let v = spec.synthesize(&c);
        raw.push(grid.norm_w(&v));
        raw_rel_error.push(rel(&v));
    }
    let limit = spec.synthesize(&limit_c);
    let monotone = stage.windows(2).all(|w| w[1] <= w[0]);
    Ok(TraceLimitReport {
        s,
        t_levels: ts,
        raw,
        raw_rel_error,
        extrapolated: grid.norm_w(&limit),
        reference_norm,
        rel_error: rel(&limit),
        monotone,
        limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
    use crate::spectral::{eigendecomposition, half_wave};
    use num_complex::Complex64;

    fn setup(n: usize, m: usize) -> (AssembledOperator, SpectralDecomposition, Vec<f64>) {
        let g = build_grid(&[(0.0, 1.0)], &[n]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &g, 0.0).unwrap();
        let spec = eigendecomposition(&op, m).unwrap();
        let phi = g.sample(|x| (-(x[0] - 0.45).powi(2) * 40.0).exp() * x[0] * (1.0 - x[0]));
        (op, spec, phi)
    }

    #[test]
    fn starts_at_projection_and_decays() {
        let (_, spec, phi) = setup(64, 10);
        let sol = extension_solution(&spec, &phi, 0.3, &[0.0, 0.1, 0.5, 1.0]).unwrap();
        let proj = spec.synthesize(&sol.coeffs);
        assert!(sol.u[0]
            .iter()
            .zip(&proj)
            .all(|(a, b)| (a - b).abs() < 1e-14));
        let norms: Vec<f64> = sol.u.iter().map(|u| spec.grid().norm_w(u)).collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn half_order_is_poisson_semigroup() {
        let (_, spec, phi) = setup(64, 8);
        let sol = extension_solution(&spec, &phi, 0.5, &[0.7]).unwrap();
        let p = half_wave(&spec, &phi, Complex64::new(0.0, 0.7)).unwrap();
        let diff: Vec<f64> = sol.u[0].iter().zip(&p).map(|(a, b)| a - b.re).collect();
        assert!(spec.grid().norm_w(&diff) < 1e-8 * spec.grid().norm_w(&sol.u[0]));
    }

    #[test]
    fn heat_route_agrees() {
        let (_, spec, phi) = setup(48, 3);
        let a = extension_solution(&spec, &phi, 0.35, &[0.4])
            .unwrap()
            .u
            .remove(0);
        let b = extension_heat_route(&spec, &phi, 0.35, 0.4).unwrap();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        assert!(spec.grid().norm_w(&d) < 1e-8 * spec.grid().norm_w(&a));
    }

    #[test]
    fn residual_vanishes_for_zero_data_and_shrinks_with_step() {
        let (op, spec, phi) = setup(48, 4);
        let zero = extension_solution(&spec, &vec![0.0; phi.len()], 0.4, &[0.5, 0.6, 0.7]).unwrap();
        assert_eq!(pde_residual(&zero, &op).unwrap().max_relative, 0.0);
        let at = |h: f64| {
            let sol = extension_solution(&spec, &phi, 0.4, &[0.5 - h, 0.5, 0.5 + h]).unwrap();
            pde_residual(&sol, &op).unwrap().max_relative
        };
        let (r1, r2) = (at(0.02), at(0.01));
        assert!(r1 < 1e-2 && (r1 / r2 - 4.0).abs() < 0.2, "{r1} {r2}");
        assert!(pde_residual(&zero, &op).is_ok());
    }

    #[test]
    fn trace_limit_single_mode_and_bump() {
        let (_, spec, phi) = setup(64, 64);
        let r = trace_derivative_limit(&spec, &phi, 0.75, 1e-3, 6).unwrap();
        assert!(r.rel_error < 1e-3 && r.monotone);
        let zero = trace_derivative_limit(&spec, &vec![0.0; phi.len()], 0.75, 1e-3, 6).unwrap();
        assert_eq!(zero.extrapolated, 0.0);
        let one =
            crate::spectral::from_pairs(spec.grid(), vec![1.0], vec![spec.eigenvector(0).to_vec()]);
        let r = trace_derivative_limit(&one, spec.eigenvector(0), 0.5, 1e-2, 6).unwrap();
        assert!((r.extrapolated - 1.0).abs() < 1e-8, "{}", r.extrapolated);
    }

    #[test]
    fn exponent_ladder() {
        assert_eq!(trace_exponents(0.25, 4), vec![1.5, 2.0, 3.5, 4.0]);
        let (l, _) = richardson(&[1.0 + 0.5, 1.0 + 0.125, 1.0 + 0.03125], &[2.0, 4.0]);
        assert!((l - 1.0).abs() < 1e-15);
    }
}
