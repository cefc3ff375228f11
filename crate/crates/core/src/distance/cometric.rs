//! `G_eps(x) = sum_j X_j(x) X_j(x)^T + eps I` and metric lengths of short
//! segments.

use crate::error::{Error, Result};
use crate::geometry::VectorFieldSet;
use nalgebra::DMatrix;

pub const MAX_DIM: usize = 6;

pub fn cometric_at(fields: &VectorFieldSet, epsilon: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let d = fields.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let mut g = DMatrix::identity(d, d) * epsilon;
    for f in fields.fields() {
        let c = nalgebra::DVector::from_vec(f.eval(x));
        g += &c * c.transpose();
    }
    Ok(g)
}

fn gram_lower(coeffs: &[f64], d: usize, epsilon: f64) -> [f64; MAX_DIM * MAX_DIM] {
    let mut g = [0.0f64; MAX_DIM * MAX_DIM];
    for a in 0..d {
        g[a * MAX_DIM + a] = epsilon;
    }
    for c in coeffs.chunks_exact(d) {
        for a in 0..d {
            if c[a] == 0.0 {
                continue;
            }
            for b in 0..=a {
                g[a * MAX_DIM + b] += c[a] * c[b];
            }
        }
    }
    g
}

/// Cholesky of the lower triangle of `g` in place, then `|L^-1 delta|`.
fn chol_norm(mut g: [f64; MAX_DIM * MAX_DIM], d: usize, delta: &[f64]) -> f64 {
    let mut z = [0.0f64; MAX_DIM];
    for i in 0..d {
        for j in 0..=i {
            let mut s = g[i * MAX_DIM + j];
            for k in 0..j {
                s -= g[i * MAX_DIM + k] * g[j * MAX_DIM + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return f64::INFINITY;
                }
                g[i * MAX_DIM + i] = s.sqrt();
            } else {
                g[i * MAX_DIM + j] = s / g[j * MAX_DIM + j];
            }
        }
        let mut s = delta[i];
        for k in 0..i {
            s -= g[i * MAX_DIM + k] * z[k];
        }
        z[i] = s / g[i * MAX_DIM + i];
    }
    z[..d].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `sqrt(delta^T G^-1 delta)` with `G = sum_j c_j c_j^T + eps I`, where the
/// `r` coefficient vectors are packed in `coeffs` (`r * d` values). Returns
/// infinity if `G` is singular along `delta`.
pub fn segment_length(coeffs: &[f64], d: usize, epsilon: f64, delta: &[f64]) -> f64 {
    chol_norm(gram_lower(coeffs, d, epsilon), d, delta)
}

/// [`segment_length`] for several regularization levels at once.
pub fn segment_lengths(coeffs: &[f64], d: usize, eps: &[f64], delta: &[f64], out: &mut [f64]) {
    let g0 = gram_lower(coeffs, d, 0.0);
    for (o, &e) in out.iter_mut().zip(eps) {
        let mut g = g0;
        for a in 0..d {
            g[a * MAX_DIM + a] += e;
        }
        *o = chol_norm(g, d, delta);
    }
}
