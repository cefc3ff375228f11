//! Globally adaptive Gauss-Kronrod (7/15) quadrature and a driver for
//! integrands over the whole line given by their logarithm.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_evals: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn qk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * h, resabs * h.abs(), resasc * h.abs());
    let mut err = ((resk - resg * h) * 1.0).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Piece {
        a,
        b,
        value: resk,
        err,
    }
}

/// Adaptive integral of `f` over `[a, b]`, bisecting the piece with the
/// largest error until `err <= max(abs_tol, rel_tol |I|)` or the evaluation
/// budget runs out.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    let target = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
    let mut pieces = vec![qk15(&mut f, a, b)];
    let mut evals = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let err: f64 = pieces.iter().map(|p| p.err).sum();
        if err <= target(value) || evals + 30 > opts.max_evals {
            return QuadResult {
                value,
                abs_err: err,
                evals,
                converged: err <= target(value),
            };
        }
        let (k, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, be), (i, p)| {
                if p.err > be {
                    (i, p.err)
                } else {
                    (bk, be)
                }
            });
        let p = pieces.swap_remove(k);
        let m = 0.5 * (p.a + p.b);
        pieces.push(qk15(&mut f, p.a, m));
        pieces.push(qk15(&mut f, m, p.b));
        evals += 30;
    }
}

/// Result of [`integrate_log`]: the integral equals `exp(log_scale) * value`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledQuad {
    pub log_scale: f64,
    pub value: f64,
    pub abs_err: f64,
    pub evals: usize,
    pub converged: bool,
}

impl ScaledQuad {
    pub fn unscaled(&self) -> (f64, f64) {
        let s = self.log_scale.exp();
        (s * self.value, s * self.abs_err)
    }
}

/// Integral over the real line of `exp(logf(y))` for a unimodal `logf`
/// peaking at `peak`. The range is cut where `logf` has dropped by `drop`
/// below its peak value, and the integrand is rescaled by the peak so tiny
/// and huge integrals keep relative accuracy: the rescaled integral is
/// resolved to `1e-10` absolute, or to `abs_tol` in unscaled units if that
/// is stricter.
pub fn integrate_log<F: Fn(f64) -> f64>(
    logf: F,
    peak: f64,
    drop: f64,
    opts: QuadOptions,
) -> ScaledQuad {
    let top = logf(peak);
    if !top.is_finite() {
        return ScaledQuad {
            log_scale: f64::NEG_INFINITY,
            value: 0.0,
            abs_err: 0.0,
            evals: 1,
            converged: top == f64::NEG_INFINITY,
        };
    }
    let reach = |dir: f64| {
        let mut w = 1.0;
        while logf(peak + dir * w) > top - drop && w < 1e4 {
            w *= 2.0;
        }
        peak + dir * w
    };
    let (lo, hi) = (reach(-1.0), reach(1.0));
    let scaled_abs = (opts.abs_tol.ln() - top).exp();
    let inner = QuadOptions {
        abs_tol: scaled_abs.min(1e-10),
        ..opts
    };
    let r = integrate(|y| (logf(y) - top).exp(), lo, hi, inner);
    ScaledQuad {
        log_scale: top,
        value: r.value,
        abs_err: r.abs_err,
        evals: r.evals,
        converged: r.converged,
    }
}

/// Maximizer of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, QuadOptions::default());
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
        assert!(r.converged);
        assert_eq!(r.evals, 15);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::default());
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn gaussian_over_the_line() {
        // exp(-y^2/2 + 300): tests the rescaling
        let q = integrate_log(|y| -0.5 * y * y + 300.0, 0.0, 60.0, QuadOptions::default());
        let v = q.value * (q.log_scale - 300.0).exp();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!(q.converged);
    }

    #[test]
    fn golden_section_finds_peak() {
        let y = golden_max(|y| -(y - 1.3).powi(2), -10.0, 10.0, 1e-10);
        assert!((y - 1.3).abs() < 1e-8);
    }
}
