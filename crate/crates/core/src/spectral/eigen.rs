//! Lowest eigenpairs of a sparse symmetric matrix.
//!
//! Small problems go to a dense symmetric eigensolver. Larger ones use a
//! Krylov-Schur style restarted Lanczos iteration with full
//! reorthogonalization, applied to `(A + sigma I)^-1` through a banded
//! Cholesky factor when the band fits in memory, and to `g I - A` otherwise.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm, SparseMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DENSE_LIMIT: usize = 2000;
const BAND_ENTRY_LIMIT: usize = 40_000_000;

/// Unit-norm (Euclidean) eigenpairs, ascending.
#[derive(Clone, Debug)]
pub struct RawEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub method: &'static str,
}

/// Lower-triangular band Cholesky factor, row `i` holding `L[i, i-b..=i]`.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factor `a + shift I`; `None` if a pivot is not positive.
    pub fn factor(a: &SparseMatrix, shift: f64) -> Option<Self> {
        let n = a.nrows();
        let b = a.bandwidth();
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let (idx, val) = a.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                if j <= i {
                    l[i * w + (b - (i - j))] = v;
                }
            }
            l[i * w + b] += shift;
        }
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(b));
                let mut sum = l[i * w + (b - (i - j))];
                for k in klo..j {
                    sum -= l[i * w + (b - (i - k))] * l[j * w + (b - (j - k))];
                }
                if j == i {
                    if !(sum > 0.0) {
                        return None;
                    }
                    l[i * w + b] = sum.sqrt();
                } else {
                    l[i * w + (b - (i - j))] = sum / l[j * w + b];
                }
            }
        }
        Some(Self { n, b, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        let mut y = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[i * w + (b - (i - k))] * y[k];
            }
            y[i] = s / self.l[i * w + b];
        }
        for i in (0..n).rev() {
            let hi = (i + b).min(n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.l[k * w + (b - (k - i))] * y[k];
            }
            y[i] = s / self.l[i * w + b];
        }
        y
    }
}

/// `m` lowest eigenpairs of the symmetric matrix `a`.
pub fn lowest_eigenpairs(a: &SparseMatrix, m: usize, seed: u64) -> Result<RawEigen> {
    let n = a.nrows();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "mode count {m} outside 1..={n}"
        )));
    }
    if n <= DENSE_LIMIT {
        return Ok(dense(a, m));
    }
    let b = a.bandwidth();
    if n.saturating_mul(b + 1) <= BAND_ENTRY_LIMIT {
        let chol = BandCholesky::factor(a, 0.0).or_else(|| {
            let g = a.gershgorin_bound();
            BandCholesky::factor(a, 1e-8 * g.max(1.0))
        });
        if let Some(ch) = chol {
            return krylov_schur(a, m, seed, Mode::ShiftInvert(ch));
        }
    }
    krylov_schur(a, m, seed, Mode::Reflect(a.gershgorin_bound()))
}

fn dense(a: &SparseMatrix, m: usize) -> RawEigen {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });
    let vectors = order
        .iter()
        .take(m)
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    finish(a, vectors, "dense")
}

enum Mode {
    ShiftInvert(BandCholesky),
    Reflect(f64),
}

impl Mode {
    fn apply(&self, a: &SparseMatrix, x: &[f64]) -> Vec<f64> {
        match self {
            Mode::ShiftInvert(ch) => ch.solve(x),
            Mode::Reflect(g) => {
                let mut y = a.mul_vec(x);
                y.iter_mut().zip(x).for_each(|(yi, xi)| *yi = g * xi - *yi);
                y
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Mode::ShiftInvert(_) => "krylov-schur shift-invert",
            Mode::Reflect(_) => "krylov-schur reflected",
        }
    }
}

fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
        }
    }
}

fn krylov_schur(a: &SparseMatrix, m: usize, seed: u64, mode: Mode) -> Result<RawEigen> {
    let n = a.nrows();
    let kmax = (2 * m + 20).min(n);
    let keep = (m + (kmax - m) / 2).min(kmax - 1).max(m);
    let max_restarts = match mode {
        Mode::ShiftInvert(_) => 200,
        Mode::Reflect(_) => 2000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_unit = |basis: &[Vec<f64>]| loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(basis, &mut v);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    };

    let mut v: Vec<Vec<f64>> = vec![random_unit(&[])];
    let mut w: Vec<Vec<f64>> = vec![mode.apply(a, &v[0])];
    let mut best: Option<(Vec<f64>, Vec<Vec<f64>>)> = None;
    for _ in 0..max_restarts {
        while v.len() < kmax {
            let mut r = w.last().unwrap().clone();
            let scale = norm(&r);
            orthogonalize(&v, &mut r);
            let nr = norm(&r);
            let next = if nr > 1e-12 * scale.max(1e-300) {
                r.iter_mut().for_each(|x| *x /= nr);
                r
            } else {
                random_unit(&v)
            };
            w.push(mode.apply(a, &next));
            v.push(next);
        }
        let k = v.len();
        let mut h = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let x = 0.5 * (dot(&v[i], &w[j]) + dot(&v[j], &w[i]));
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .total_cmp(&eig.eigenvalues[i])
                .then(i.cmp(&j))
        });
        let combine = |src: &[Vec<f64>], col: usize| {
            let mut out = vec![0.0; n];
            for (i, s) in src.iter().enumerate() {
                let c = eig.eigenvectors[(i, col)];
                out.iter_mut().zip(s).for_each(|(o, x)| *o += c * x);
            }
            out
        };
        let new_v: Vec<Vec<f64>> = order.iter().take(keep).map(|&c| combine(&v, c)).collect();
        let new_w: Vec<Vec<f64>> = order.iter().take(keep).map(|&c| combine(&w, c)).collect();

        let mut values = Vec::with_capacity(m);
        let mut ok = true;
        for x in new_v.iter().take(m) {
            let ax = a.mul_vec(x);
            let lam = dot(x, &ax);
            let res = ax
                .iter()
                .zip(x)
                .map(|(p, q)| (p - lam * q).powi(2))
                .sum::<f64>()
                .sqrt();
            ok &= res < 1e-10 * (1.0 + lam.abs());
            values.push(lam);
        }
        best = Some((values, new_v[..m].to_vec()));
        if ok {
            break;
        }
        v = new_v;
        w = new_w;
    }
    let (values, vectors) = best.expect("at least one restart");
    let mut pairs: Vec<(f64, Vec<f64>)> = values.into_iter().zip(vectors).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let vectors: Vec<Vec<f64>> = pairs.into_iter().map(|p| p.1).collect();
    Ok(finish(a, vectors, mode.name()))
}

/// Fixes signs, recomputes Rayleigh quotients and residuals.
fn finish(a: &SparseMatrix, mut vectors: Vec<Vec<f64>>, method: &'static str) -> RawEigen {
    let mut residuals = Vec::with_capacity(vectors.len());
    let mut vals = Vec::with_capacity(vectors.len());
    for x in vectors.iter_mut() {
        let nx = norm(x);
        x.iter_mut().for_each(|v| *v /= nx);
        let (imax, _) = x.iter().enumerate().fold((0, 0.0f64), |(bi, bv), (i, v)| {
            if v.abs() > bv + 1e-12 {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
        if x[imax] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let ax = a.mul_vec(x);
        let lam = dot(x, &ax);
        residuals.push(
            ax.iter()
                .zip(x.iter())
                .map(|(p, q)| (p - lam * q).powi(2))
                .sum::<f64>()
                .sqrt(),
        );
        vals.push(lam);
    }
    let converged = residuals
        .iter()
        .zip(&vals)
        .all(|(r, l)| *r < 1e-8 * (1.0 + l.abs()));
    RawEigen {
        values: vals,
        vectors,
        residuals,
        converged,
        method,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, t)
    }

    fn exact(n: usize, k: usize) -> f64 {
        let x = (k as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
        4.0 * x * x
    }

    #[test]
    fn band_cholesky_solves() {
        let a = lap1d(50);
        let ch = BandCholesky::factor(&a, 0.0).unwrap();
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let y = ch.solve(&a.mul_vec(&x));
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-10));
    }

    #[test]
    fn dense_path_matches_closed_form() {
        let r = lowest_eigenpairs(&lap1d(100), 5, 1).unwrap();
        for k in 0..5 {
            assert!((r.values[k] - exact(100, k + 1)).abs() < 1e-12);
            assert!(r.residuals[k] < 1e-12);
        }
    }

    #[test]
    fn krylov_schur_matches_closed_form() {
        let n = 2500;
        let r = lowest_eigenpairs(&lap1d(n), 6, 7).unwrap();
        assert!(r.converged);
        assert!(r.method.contains("shift-invert"));
        for k in 0..6 {
            assert!(((r.values[k] - exact(n, k + 1)) / exact(n, k + 1)).abs() < 1e-9);
        }
        for i in 0..6 {
            for j in 0..6 {
                let d = dot(&r.vectors[i], &r.vectors[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reflected_mode_on_diagonal() {
        let n = 300;
        let a = SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0 + i as f64)).collect());
        let r = krylov_schur(&a, 3, 3, Mode::Reflect(a.gershgorin_bound())).unwrap();
        assert_eq!(
            r.values.iter().map(|v| v.round()).collect::<Vec<_>>(),
            vec![1.0, 2.0, 3.0]
        );
    }
}
