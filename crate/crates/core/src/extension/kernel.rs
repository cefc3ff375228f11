//! Scalar extension kernels `theta(lambda, t)` and their `t^k d_t^k`
//! derivatives, evaluated by quadrature in `y = ln mu`.
//!
//! With `a = lambda t^2 / 4`,
//! `theta = Gamma(s)^-1 int_0^inf exp(-mu - a/mu) mu^(s-1) dmu`
//! and `t^k d_t^k exp(-a/mu) = sum_j c_jk (a/mu)^j exp(-a/mu)`. Every
//! `j`-term has a log-concave integrand in `y`, so each is integrated on its
//! own around its exact mode.

use super::gamma::{gamma, ln_gamma};
use super::quadrature::{golden_max, integrate_log, QuadOptions};
use crate::error::{Error, Result};
use serde::Serialize;

/// How far below the peak (in log units) the integration range extends.
const LOG_DROP: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

impl KernelValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            abs_err: 0.0,
            evals: 0,
            converged: true,
        }
    }

    /// Error unless the quadrature met its tolerance.
    pub fn checked(self, requested: f64) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                achieved: self.abs_err,
                requested,
            })
        }
    }
}

/// Coefficients `c_jk` of `t^k d_t^k exp(-alpha t^2) = sum_j c_jk (alpha t^2)^j exp(-alpha t^2)`.
pub fn derivative_coefficients(k: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for step in 0..k {
        let mut next = vec![0.0; c.len() + 1];
        for (j, &cj) in c.iter().enumerate() {
            next[j] += cj * (2.0 * j as f64 - step as f64);
            next[j + 1] -= 2.0 * cj;
        }
        c = next;
    }
    c
}

#[derive(Clone, Copy, Debug)]
pub struct ExtensionKernel {
    s: f64,
    opts: QuadOptions,
}

impl ExtensionKernel {
    pub fn new(s: f64) -> Result<Self> {
        check_s(s)?;
        Ok(Self {
            s,
            opts: QuadOptions::default(),
        })
    }

    pub fn with_options(mut self, opts: QuadOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn options(&self) -> QuadOptions {
        self.opts
    }

    /// `int exp(-mu - a/mu) (a/mu)^j mu^(s-1) dmu`.
    fn term(&self, a: f64, j: usize) -> (f64, f64, usize, bool) {
        if j > 0 && a == 0.0 {
            return (0.0, 0.0, 0, true);
        }
        let p = self.s - j as f64;
        let mode = if p >= 0.0 {
            0.5 * (p + (p * p + 4.0 * a).sqrt())
        } else {
            2.0 * a / ((p * p + 4.0 * a).sqrt() - p)
        };
        let ja = if j > 0 { j as f64 * a.ln() } else { 0.0 };
        let logf = |y: f64| {
            let inner = if a > 0.0 { a * (-y).exp() } else { 0.0 };
            -y.exp() + p * y - inner + ja
        };
        let q = integrate_log(logf, mode.ln(), LOG_DROP, self.opts);
        let (v, e) = q.unscaled();
        (v, e, q.evals, q.converged)
    }

    fn check(&self, lambda: f64, t: f64) -> Result<f64> {
        if !(lambda >= 0.0 && lambda.is_finite()) || !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kernel needs lambda, t >= 0 (got {lambda}, {t})"
            )));
        }
        Ok(0.25 * lambda * t * t)
    }

    /// `theta(lambda, t)`.
    pub fn theta(&self, lambda: f64, t: f64) -> Result<KernelValue> {
        self.theta_k(lambda, t, 0)
    }

    /// `theta_k = t^k d_t^k theta`.
    pub fn theta_k(&self, lambda: f64, t: f64, k: usize) -> Result<KernelValue> {
        let a = self.check(lambda, t)?;
        let g = gamma(self.s);
        let mut out = KernelValue::exact(0.0);
        for (j, c) in derivative_coefficients(k).into_iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (v, e, n, ok) = self.term(a, j);
            out.value += c * v / g;
            out.abs_err += c.abs() * e / g;
            out.evals += n;
            out.converged &= ok;
        }
        Ok(out)
    }

    /// `1 - theta(lambda, t)` without cancellation at small `t`.
    pub fn theta_deficit(&self, lambda: f64, t: f64) -> Result<KernelValue> {
        let a = self.check(lambda, t)?;
        if a == 0.0 {
            return Ok(KernelValue::exact(0.0));
        }
        let s = self.s;
        let la = a.ln();
        let logf = |y: f64| -y.exp() + s * y + (-(-a * (-y).exp()).exp_m1()).ln();
        let lo = la.min(0.0) - 20.0;
        let hi = la.max(0.0) + 10.0;
        let peak = golden_max(logf, lo, hi, 1e-8);
        let q = integrate_log(logf, peak, LOG_DROP, self.opts);
        let (v, e) = q.unscaled();
        let g = gamma(s);
        Ok(KernelValue {
            value: v / g,
            abs_err: e / g,
            evals: q.evals,
            converged: q.converged,
        })
    }
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "s must lie in (0,1), got {s}"
        )))
    }
}

pub fn theta(lambda: f64, t: f64, s: f64) -> Result<KernelValue> {
    ExtensionKernel::new(s)?.theta(lambda, t)
}

pub fn theta_k(lambda: f64, t: f64, s: f64, k: usize) -> Result<KernelValue> {
    ExtensionKernel::new(s)?.theta_k(lambda, t, k)
}

pub fn theta_deficit(lambda: f64, t: f64, s: f64) -> Result<KernelValue> {
    ExtensionKernel::new(s)?.theta_deficit(lambda, t)
}

/// Power series of `theta` (sum of the two Frobenius branches `a^k` and
/// `a^(k+s)`). Accurate while `lambda t^2` is moderate; used as a check on
/// the quadrature.
pub fn theta_series(lambda: f64, t: f64, s: f64) -> f64 {
    let a = 0.25 * lambda * t * t;
    1.0 - deficit_series(a, s)
}

/// Series for `1 - theta` in terms of `a = lambda t^2 / 4`.
pub fn deficit_series(a: f64, s: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let mut regular = 0.0;
    let mut term = 1.0;
    let mut singular = 0.0;
    let mut sterm = (ln_gamma(1.0 - s) - ln_gamma(1.0 + s) + s * a.ln()).exp();
    for k in 1..400 {
        singular += sterm;
        sterm *= a / (k as f64 * (k as f64 + s));
        term *= a / (k as f64 * (k as f64 - s));
        regular += term;
        if term.abs() < 1e-18 * regular.abs().max(1e-300) && sterm.abs() < 1e-18 * singular.abs() {
            break;
        }
    }
    singular - regular
}

/// `D(s) = int_0^inf exp(-1/(4x)) x^(s-2) dx` by quadrature in `y = ln x`.
pub fn constant_d(s: f64) -> Result<KernelValue> {
    check_s(s)?;
    let logf = |y: f64| -0.25 * (-y).exp() + (s - 1.0) * y;
    let peak = -(4.0 * (1.0 - s)).ln();
    let q = integrate_log(logf, peak, LOG_DROP, QuadOptions::default());
    let (v, e) = q.unscaled();
    Ok(KernelValue {
        value: v,
        abs_err: e,
        evals: q.evals,
        converged: q.converged,
    })
}

/// `C(s) = -D(s) / (2 Gamma(s))`.
pub fn constant_c(s: f64) -> Result<KernelValue> {
    let d = constant_d(s)?;
    let g = 2.0 * gamma(s);
    Ok(KernelValue {
        value: -d.value / g,
        abs_err: d.abs_err / g,
        ..d
    })
}

/// Closed form `4^(1-s) Gamma(1-s)` of `D(s)`.
pub fn constant_d_closed(s: f64) -> f64 {
    4f64.powf(1.0 - s) * gamma(1.0 - s)
}
