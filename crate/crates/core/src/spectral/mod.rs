//! Partial eigendecomposition and functional calculus of the assembled
//! operator.

pub mod eigen;
pub mod masuda;

use crate::error::{Error, Result};
use crate::geometry::{AssembledOperator, Grid};
use crate::wave::WaveState;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use eigen::{lowest_eigenpairs, BandCholesky, RawEigen, DENSE_LIMIT};
pub use masuda::{masuda_residual, MasudaPoint, MasudaReport};

/// Leading eigenpairs of `A`, eigenvectors orthonormal in the grid inner
/// product.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    grid: Grid,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    converged: bool,
    method: String,
}

/// `c_i = <phi, phi_i>_w` and the norm of what the modes miss.
#[derive(Clone, Debug, Serialize)]
pub struct ModalCoefficients {
    pub coeffs: Vec<f64>,
    pub norm: f64,
    pub tail: f64,
}

/// A synthesized grid function with the projection tail of its input.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub values: Vec<f64>,
    pub tail: f64,
}

pub fn eigendecomposition(op: &AssembledOperator, m: usize) -> Result<SpectralDecomposition> {
    let raw = lowest_eigenpairs(op.matrix(), m, 0x5eed)?;
    Ok(SpectralDecomposition::from_raw(op.grid(), raw))
}

impl SpectralDecomposition {
    pub fn from_raw(grid: &Grid, raw: RawEigen) -> Self {
        let scale = 1.0 / grid.weight().sqrt();
        let eigenvectors = raw
            .vectors
            .into_iter()
            .map(|v| v.into_iter().map(|x| x * scale).collect())
            .collect();
        Self {
            grid: grid.clone(),
            eigenvalues: raw.values,
            eigenvectors,
            residuals: raw.residuals,
            converged: raw.converged,
            method: raw.method.to_string(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    /// `|A phi_i - lambda_i phi_i|_w`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    /// `max |Phi^T W Phi - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.len() {
            for j in 0..=i {
                let d = self
                    .grid
                    .dot_w(&self.eigenvectors[i], &self.eigenvectors[j]);
                worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// Eigenvalues with roundoff-negative values clamped to zero.
    pub(crate) fn lambda(&self, i: usize) -> f64 {
        self.eigenvalues[i].max(0.0)
    }

    pub fn project(&self, phi: &[f64]) -> Result<ModalCoefficients> {
        if phi.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                got: phi.len(),
            });
        }
        let coeffs: Vec<f64> = self
            .eigenvectors
            .par_iter()
            .map(|e| self.grid.dot_w(phi, e))
            .collect();
        let back = self.synthesize(&coeffs);
        let rest: Vec<f64> = phi.iter().zip(&back).map(|(a, b)| a - b).collect();
        Ok(ModalCoefficients {
            norm: self.grid.norm_w(phi),
            tail: self.grid.norm_w(&rest),
            coeffs,
        })
    }

    /// `sum_i c_i phi_i`, summed over modes in a fixed order per node.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        out.par_chunks_mut(4096).enumerate().for_each(|(b, chunk)| {
            let off = b * 4096;
            for (c, e) in coeffs.iter().zip(&self.eigenvectors) {
                if *c == 0.0 {
                    continue;
                }
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o += c * e[off + k];
                }
            }
        });
        out
    }

    /// `f(A) phi` restricted to the computed modes.
    pub fn apply_fn(&self, phi: &[f64], f: impl Fn(f64) -> f64) -> Result<Synthesis> {
        let mc = self.project(phi)?;
        let c: Vec<f64> = mc
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| f(self.lambda(i)) * c)
            .collect();
        Ok(Synthesis {
            values: self.synthesize(&c),
            tail: mc.tail,
        })
    }

    fn synthesize_complex(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
        let im: Vec<f64> = coeffs.iter().map(|c| c.im).collect();
        let (re, im) = rayon::join(|| self.synthesize(&re), || self.synthesize(&im));
        re.into_iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect()
    }
}

/// `exp(-tau A) phi`.
pub fn heat_semigroup(spec: &SpectralDecomposition, phi: &[f64], tau: f64) -> Result<Synthesis> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat time must be >= 0, got {tau}"
        )));
    }
    spec.apply_fn(phi, |l| (-tau * l).exp())
}

/// `A^s phi` for `0 < s <= 1`.
pub fn fractional_power(spec: &SpectralDecomposition, phi: &[f64], s: f64) -> Result<Synthesis> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fractional order must lie in (0,1], got {s}"
        )));
    }
    spec.apply_fn(phi, |l| l.powf(s))
}

/// `cos(t sqrt A) u0 + sin(t sqrt A)/sqrt A u1` and its time derivative.
pub fn wave_propagator(
    spec: &SpectralDecomposition,
    u0: &[f64],
    u1: &[f64],
    t: f64,
) -> Result<WaveState> {
    let a = spec.project(u0)?.coeffs;
    let b = spec.project(u1)?.coeffs;
    let mut cu = Vec::with_capacity(a.len());
    let mut cv = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let k = spec.lambda(i).sqrt();
        let (sn, cs) = (k * t).sin_cos();
        let sinc = if k * t.abs() < 1e-8 { t } else { sn / k };
        cu.push(cs * a[i] + sinc * b[i]);
        cv.push(-k * sn * a[i] + cs * b[i]);
    }
    Ok(WaveState::new(
        spec.synthesize(&cu),
        spec.synthesize(&cv),
        t,
    ))
}

/// `exp(i z sqrt A) u0` for `Im z >= 0`.
pub fn half_wave(spec: &SpectralDecomposition, u0: &[f64], z: Complex64) -> Result<Vec<Complex64>> {
    if z.im < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "half-wave needs Im z >= 0, got {z}"
        )));
    }
    let c = spec.project(u0)?.coeffs;
    let cz: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(i, ci)| (Complex64::i() * z * spec.lambda(i).sqrt()).exp() * ci)
        .collect();
    Ok(spec.synthesize_complex(&cz))
}

/// Weighted norm of a complex grid function.
pub fn complex_norm_w(grid: &Grid, v: &[Complex64]) -> f64 {
    (grid.weight() * v.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// `sup_i lambda_i^(2s) exp(-2 tau lambda_i)` over the computed spectrum, and
/// the bound `(s/tau)^(2s) exp(-2s)` over all `lambda >= 0`.
pub fn power_heat_sup(spec: &SpectralDecomposition, tau: f64, s: f64) -> (f64, f64) {
    let sup = (0..spec.len())
        .map(|i| {
            let l = spec.lambda(i);
            l.powf(2.0 * s) * (-2.0 * tau * l).exp()
        })
        .fold(0.0, f64::max);
    (sup, (s / tau).powf(2.0 * s) * (-2.0 * s).exp())
}

/// Spectral decomposition built from explicit pairs; vectors are taken as
/// given (already orthonormal in the grid inner product).
pub fn from_pairs(grid: &Grid, values: Vec<f64>, vectors: Vec<Vec<f64>>) -> SpectralDecomposition {
    let m = values.len();
    SpectralDecomposition {
        grid: grid.clone(),
        eigenvalues: values,
        eigenvectors: vectors,
        residuals: vec![0.0; m],
        converged: true,
        method: "given".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};

    fn flat(n: usize) -> (AssembledOperator, SpectralDecomposition) {
        let g = build_grid(&[(0.0, 1.0)], &[n]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &g, 0.0).unwrap();
        let spec = eigendecomposition(&op, n).unwrap();
        (op, spec)
    }

    fn bump(g: &Grid) -> Vec<f64> {
        g.sample(|x| (-((x[0] - 0.5) / 0.08).powi(2)).exp())
    }

    #[test]
    fn flat_spectrum_closed_form() {
        let n = 40;
        let (op, spec) = flat(n);
        let h = op.grid().spacing()[0];
        for k in 0..n {
            let x = ((k + 1) as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
            let exact = 4.0 / (h * h) * x * x;
            assert!((spec.eigenvalues()[k] - exact).abs() < 1e-9 * exact);
        }
        assert!(spec.orthonormality_defect() < 1e-10);
        assert!(spec.converged());
    }

    #[test]
    fn calculus_identities() {
        let (op, spec) = flat(64);
        let g = op.grid().clone();
        let phi = bump(&g);
        let a = heat_semigroup(
            &spec,
            &heat_semigroup(&spec, &phi, 1e-3).unwrap().values,
            2e-3,
        )
        .unwrap();
        let b = heat_semigroup(&spec, &phi, 3e-3).unwrap();
        assert!(
            g.norm_w(
                &a.values
                    .iter()
                    .zip(&b.values)
                    .map(|(x, y)| x - y)
                    .collect::<Vec<_>>()
            ) < 1e-10
        );
        assert!(b.tail < 1e-12);

        let p1 = fractional_power(&spec, &phi, 1.0).unwrap().values;
        let direct = op.apply(&phi);
        let diff: Vec<f64> = p1.iter().zip(&direct).map(|(x, y)| x - y).collect();
        assert!(g.norm_w(&diff) < 1e-8 * g.norm_w(&direct));

        let half = fractional_power(
            &spec,
            &fractional_power(&spec, &phi, 0.5).unwrap().values,
            0.5,
        )
        .unwrap()
        .values;
        let diff: Vec<f64> = half.iter().zip(&direct).map(|(x, y)| x - y).collect();
        assert!(g.norm_w(&diff) < 1e-8 * g.norm_w(&direct));

        let fh = fractional_power(
            &spec,
            &heat_semigroup(&spec, &phi, 1e-3).unwrap().values,
            0.3,
        )
        .unwrap()
        .values;
        let hf = heat_semigroup(
            &spec,
            &fractional_power(&spec, &phi, 0.3).unwrap().values,
            1e-3,
        )
        .unwrap()
        .values;
        let diff: Vec<f64> = fh.iter().zip(&hf).map(|(x, y)| x - y).collect();
        assert!(g.norm_w(&diff) < 1e-10 * g.norm_w(&fh));

        assert!(heat_semigroup(&spec, &phi, -1.0).is_err());
        assert!(fractional_power(&spec, &phi, 0.0).is_err());
    }

    #[test]
    fn half_wave_norms() {
        let (op, spec) = flat(48);
        let g = op.grid().clone();
        let phi = bump(&g);
        let n0 = g.norm_w(&spec.synthesize(&spec.project(&phi).unwrap().coeffs));
        for xi in [0.0, 0.3, 1.7, -2.0] {
            let v = half_wave(&spec, &phi, Complex64::new(xi, 0.0)).unwrap();
            assert!((complex_norm_w(&g, &v) - n0).abs() < 1e-10 * n0);
        }
        let mut prev = f64::INFINITY;
        for eta in [0.0, 0.01, 0.1, 0.5, 1.0] {
            let n = complex_norm_w(
                &g,
                &half_wave(&spec, &phi, Complex64::new(0.4, eta)).unwrap(),
            );
            assert!(n <= prev);
            prev = n;
        }
        assert!(half_wave(&spec, &phi, Complex64::new(0.0, -0.1)).is_err());
    }

    #[test]
    fn propagator_eigenmode_and_zero_mode() {
        let (_, spec) = flat(24);
        let phi = spec.eigenvector(2).to_vec();
        let l = spec.eigenvalues()[2];
        let s = wave_propagator(&spec, &phi, &vec![0.0; 24], 0.7).unwrap();
        for (a, b) in s.u.iter().zip(&phi) {
            assert!((a - (0.7 * l.sqrt()).cos() * b).abs() < 1e-10);
        }
        let g = build_grid(&[(0.0, 1.0)], &[3]).unwrap();
        let e = 1.0 / g.weight().sqrt();
        let z = from_pairs(&g, vec![0.0], vec![vec![e, 0.0, 0.0]]);
        let s = wave_propagator(&z, &[0.0; 3], &[e, 0.0, 0.0], 2.5).unwrap();
        assert!((s.u[0] - 2.5 * e).abs() < 1e-12);
    }

    #[test]
    fn power_heat_bound() {
        let (_, spec) = flat(64);
        for (tau, s) in [(1e-3, 0.5), (1e-4, 0.25), (1e-2, 0.9)] {
            let (sup, bound) = power_heat_sup(&spec, tau, s);
            assert!(sup <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn masuda_single_mode_is_second_order() {
        let (op, spec) = flat(32);
        let phi = spec.eigenvector(0).to_vec();
        let xs = |d: f64| vec![-d, 0.0, d];
        let es = |d: f64| vec![0.5 - d, 0.5, 0.5 + d];
        let r1 = masuda_residual(&spec, &op, &phi, &xs(1e-2), &es(1e-2)).unwrap();
        let r2 = masuda_residual(&spec, &op, &phi, &xs(5e-3), &es(5e-3)).unwrap();
        let ratio = r1.max_residual / r2.max_residual;
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        let ratio = r1.max_harmonic_residual / r2.max_harmonic_residual;
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        let z = masuda_residual(&spec, &op, &vec![0.0; 32], &xs(1e-2), &es(1e-2)).unwrap();
        assert_eq!(z.max_residual, 0.0);
    }
}
