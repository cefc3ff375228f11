//! Indicial roots of the Fuchsian form and residual diagnostics for
//! `v = t^(1-2s) u`.
//!
//! Writing `a = 1-2s`, the modal extension `theta` satisfies
//! `theta_2 + a theta_1 - lambda t^2 theta = 0` (with `theta_k = t^k d_t^k theta`),
//! which for `w = t^a theta` reads
//! `t^2 w'' + (2s-1) t w' - (2s-1) w - lambda t^2 w = 0`.
//! The `+ t^2 P v` form differs from it by `2 lambda t^2 w`; that residual
//! is reported next to the physical one so the discrepancy stays visible.

use super::kernel::ExtensionKernel;
use super::solution::{kernel_table, KERNEL_TOL};
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FuchsRoots {
    pub roots: [(f64, f64); 2],
    /// Smallest integer strictly above both real parts.
    pub h: i64,
}

impl FuchsRoots {
    pub fn complex(&self) -> [Complex64; 2] {
        self.roots.map(|(re, im)| Complex64::new(re, im))
    }

    pub fn real(&self) -> Option<[f64; 2]> {
        if self.roots.iter().all(|r| r.1 == 0.0) {
            Some([self.roots[0].0, self.roots[1].0])
        } else {
            None
        }
    }
}

/// Roots of `l(l-1) + a1 l + a0 = 0`, ascending by real part. An integer
/// root is returned exactly and the other one from Vieta, so inputs like
/// `(2s-1, 1-2s)` give `{1-2s, 1}` bit for bit.
pub fn fuchs_roots(a1: f64, a0: f64) -> FuchsRoots {
    let b = a1 - 1.0;
    let disc = b * b - 4.0 * a0;
    let mut roots = if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, a0 / q) };
        let snapped = [r1, r2].into_iter().find_map(|r| {
            let k = r.round();
            let scale = 1.0 + k * k + b.abs() * k.abs() + a0.abs();
            ((r - k).abs() <= 1e-9 * (1.0 + k.abs()) && (k * k + b * k + a0).abs() <= 1e-14 * scale)
                .then_some(k)
        });
        match snapped {
            Some(k) if k != 0.0 => [(k, 0.0), (a0 / k, 0.0)],
            Some(k) => [(k, 0.0), (-b - k, 0.0)],
            None => [(r1, 0.0), (r2, 0.0)],
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        [(-0.5 * b, -im), (-0.5 * b, im)]
    };
    roots.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let top = roots[0].0.max(roots[1].0);
    FuchsRoots {
        roots,
        h: top.floor() as i64 + 1,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FuchsPoint {
    pub t: f64,
    /// Relative residual of the physical form, worst mode.
    pub physical: f64,
    /// Relative residual of the `+ t^2 P v` form, worst mode.
    pub printed: f64,
    /// Weighted norms of `A = t^(1-2s) u_t`, `B = t^(-2s) u`, `v = t^(1-2s) u`.
    pub a_norm: f64,
    pub b_norm: f64,
    pub v_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndicialFit {
    pub lambda: f64,
    pub t_range: (f64, f64),
    /// Slope of `ln v` against `ln t`.
    pub leading: f64,
    /// Slope of `ln |t^(1-2s) (1 - theta)|`.
    pub subleading: f64,
    pub roots: FuchsRoots,
    pub leading_error: f64,
    pub subleading_error: f64,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FuchsDiagnostics {
    pub s: f64,
    pub roots: FuchsRoots,
    pub points: Vec<FuchsPoint>,
    pub max_physical: f64,
    pub max_printed: f64,
    /// Relative mismatch between a difference quotient of `A` and `t P B`.
    pub chain_residual: Vec<(f64, f64)>,
    pub indicial: IndicialFit,
    /// `t^(1-2s)` over- or underflowed somewhere on the grid.
    pub scaling_unstable: bool,
}

/// Relative tolerance of the indicial fit, applied as `tol * max(|root|, 1)`.
pub const INDICIAL_TOL: f64 = 0.05;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-log slopes of `v` and of its deficit on `t in [1e-12, 1e-7]`,
/// compared with the indicial roots `{1-2s, 1}`.
pub fn indicial_fit(s: f64, lambda: f64) -> Result<IndicialFit> {
    let kernel = ExtensionKernel::new(s)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "indicial fit needs lambda > 0, got {lambda}"
        )));
    }
    let a = 1.0 - 2.0 * s;
    let (lo, hi) = (1e-12f64, 1e-7f64);
    let n = 11;
    let mut lt = Vec::new();
    let mut lv = Vec::new();
    let mut ld = Vec::new();
    for k in 0..n {
        let t = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp();
        let th = kernel.theta(lambda, t)?.checked(KERNEL_TOL)?;
        let def = kernel.theta_deficit(lambda, t)?.checked(KERNEL_TOL)?;
        lt.push(t.ln());
        lv.push(a * t.ln() + th.ln());
        ld.push(a * t.ln() + def.abs().ln());
    }
    let roots = fuchs_roots(2.0 * s - 1.0, 1.0 - 2.0 * s);
    let leading = slope(&lt, &lv);
    let subleading = slope(&lt, &ld);
    let tol = |r: f64| INDICIAL_TOL * r.abs().max(1.0);
    let (r_lead, r_sub) = (a, 1.0);
    let leading_error = (leading - r_lead).abs();
    let subleading_error = (subleading - r_sub).abs();
    Ok(IndicialFit {
        lambda,
        t_range: (lo, hi),
        leading,
        subleading,
        roots,
        leading_error,
        subleading_error,
        within_tolerance: leading_error <= tol(r_lead) && subleading_error <= tol(r_sub),
    })
}

/// Modal residuals of the Fuchsian form on `t_grid`, plus the `A`/`B`
/// chain and the indicial fit on the lowest positive mode.
pub fn fuchsian_residual(
    spec: &SpectralDecomposition,
    phi: &[f64],
    s: f64,
    t_grid: &[f64],
) -> Result<FuchsDiagnostics> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument(
            "Fuchsian residual needs t > 0".into(),
        ));
    }
    let kernel = ExtensionKernel::new(s)?;
    let a = 1.0 - 2.0 * s;
    let grid = spec.grid();
    let mc = spec.project(phi)?;
    let m = spec.len();
    let (th0, _) = kernel_table(spec, &kernel, t_grid, 0)?;
    let (th1, _) = kernel_table(spec, &kernel, t_grid, 1)?;
    let (th2, _) = kernel_table(spec, &kernel, t_grid, 2)?;
    let mut points = Vec::new();
    let mut scaling_unstable = false;
    let mut a_vals = Vec::new();
    for (j, &t) in t_grid.iter().enumerate() {
        let ta = t.powf(a);
        scaling_unstable |= !(ta.is_normal() && ta < 1e150);
        let mut physical = 0.0f64;
        let mut printed = 0.0f64;
        let (mut ac, mut bc, mut vc) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..m {
            let l = spec.lambda(i);
            let (t0, t1, t2) = (th0[j][i], th1[j][i], th2[j][i]);
            let lt2 = l * t * t * t0;
            let scale = t2.abs() + (a * t1).abs() + lt2.abs();
            if mc.coeffs[i] != 0.0 && scale > 0.0 {
                physical = physical.max((t2 + a * t1 - lt2).abs() / scale);
                printed = printed.max((t2 + a * t1 + lt2).abs() / scale);
            }
            ac[i] = ta / t * t1 * mc.coeffs[i];
            bc[i] = ta / t * t0 * mc.coeffs[i];
            vc[i] = ta * t0 * mc.coeffs[i];
        }
        a_vals.push(ac.clone());
        points.push(FuchsPoint {
            t,
            physical,
            printed,
            a_norm: grid.norm_w(&spec.synthesize(&ac)),
            b_norm: grid.norm_w(&spec.synthesize(&bc)),
            v_norm: grid.norm_w(&spec.synthesize(&vc)),
        });
    }
    let mut chain_residual = Vec::new();
    for j in 1..t_grid.len().saturating_sub(1) {
        let (tm, t, tp) = (t_grid[j - 1], t_grid[j], t_grid[j + 1]);
        let (h0, h1) = (t - tm, tp - t);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for i in 0..m {
            let d = (h0 * h0 * a_vals[j + 1][i] - h1 * h1 * a_vals[j - 1][i]
                + (h1 * h1 - h0 * h0) * a_vals[j][i])
                / (h0 * h1 * (h0 + h1));
            let rhs = t * spec.lambda(i) * t.powf(a) / t * th0[j][i] * mc.coeffs[i];
            num += (d - rhs) * (d - rhs);
            den += rhs * rhs;
        }
        chain_residual.push((
            t,
            if den > 0.0 {
                (num / den).sqrt()
            } else {
                num.sqrt()
            },
        ));
    }
    let lam = (0..m)
        .map(|i| spec.lambda(i))
        .find(|&l| l > 0.0)
        .unwrap_or(1.0);
    let indicial = indicial_fit(s, lam)?;
    Ok(FuchsDiagnostics {
        s,
        roots: fuchs_roots(2.0 * s - 1.0, 1.0 - 2.0 * s),
        max_physical: points.iter().map(|p| p.physical).fold(0.0, f64::max),
        max_printed: points.iter().map(|p| p.printed).fold(0.0, f64::max),
        points,
        chain_residual,
        indicial,
        scaling_unstable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
    use crate::spectral::eigendecomposition;

    #[test]
    fn roots_of_the_extension_equation_are_exact() {
        for k in 1..10 {
            let s = k as f64 / 10.0;
            let r = fuchs_roots(2.0 * s - 1.0, 1.0 - 2.0 * s);
            let mut got = r.real().unwrap().to_vec();
            got.sort_by(f64::total_cmp);
            let mut want = vec![1.0, 1.0 - 2.0 * s];
            want.sort_by(f64::total_cmp);
            assert_eq!(got, want);
            assert_eq!(r.h, 2);
        }
    }

    #[test]
    fn trivial_roots() {
        assert_eq!(fuchs_roots(0.0, 0.0).real(), Some([0.0, 1.0]));
        assert_eq!(fuchs_roots(0.0, 0.0).h, 2);
        assert_eq!(fuchs_roots(1.0, 0.0).real(), Some([0.0, 0.0]));
        assert_eq!(fuchs_roots(1.0, 0.0).h, 1);
        let c = fuchs_roots(1.0, 1.0);
        assert_eq!(c.roots, [(0.0, -1.0), (0.0, 1.0)]);
        assert_eq!(c.h, 1);
    }

    #[test]
    fn physical_form_holds_and_printed_sign_does_not() {
        let g = build_grid(&[(0.0, 1.0)], &[40]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &g, 0.0).unwrap();
        let spec = eigendecomposition(&op, 4).unwrap();
        let phi = g.sample(|x| x[0] * (1.0 - x[0]));
        let d = fuchsian_residual(&spec, &phi, 0.5, &[0.1, 0.2, 0.3]).unwrap();
        assert!(d.max_physical < 1e-9);
        assert!(d.max_printed > 0.1);
        assert!(d.indicial.within_tolerance);
        let z = fuchsian_residual(&spec, &vec![0.0; phi.len()], 0.5, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(z.max_physical, 0.0);
        assert!(z.points.iter().all(|p| p.v_norm == 0.0));
    }
}
