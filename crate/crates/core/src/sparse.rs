//! Compressed sparse row matrices with deterministic assembly.

use rayon::prelude::*;

/// Rows above this count are multiplied in parallel.
const PAR_ROWS: usize = 16_384;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in the order they were supplied, so assembly order fully
    /// determines the rounding of every entry.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        // stable: keeps insertion order among duplicates
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&j) {
            Ok(k) => val[k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = A x`. Each row is reduced sequentially, so the result does not
    /// depend on the thread count.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row_dot = |i: usize| {
            let (a, b) = (self.indptr[i], self.indptr[i + 1]);
            let mut acc = 0.0;
            for k in a..b {
                acc += self.values[k] * x[self.indices[k]];
            }
            acc
        };
        if self.nrows >= PAR_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                trip.push((j, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, trip)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Largest `|a_ij - a_ji|`; zero means bitwise symmetric.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Upper bound on the spectral radius from Gershgorin discs.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Half bandwidth: `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.nrows {
            for &j in self.row(i).0 {
                b = b.max(i.abs_diff(j));
            }
        }
        b
    }

    /// `F^T F`, accumulated so that entries `(a, b)` and `(b, a)` see the
    /// same products in the same order; the result is bitwise symmetric.
    pub fn gram(&self) -> Self {
        let t = self.transpose();
        let n = self.ncols;
        let mut acc = vec![0.0f64; n];
        let mut mark = vec![usize::MAX; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for a in 0..n {
            cols.clear();
            let (rows, fa) = t.row(a);
            for (&r, &va) in rows.iter().zip(fa) {
                let (idx, val) = self.row(r);
                for (&b, &vb) in idx.iter().zip(val) {
                    if mark[b] != a {
                        mark[b] = a;
                        acc[b] = 0.0;
                        cols.push(b);
                    }
                    acc[b] += va * vb;
                }
            }
            cols.sort_unstable();
            for &b in &cols {
                indices.push(b);
                values.push(acc[b]);
            }
            indptr[a + 1] = indices.len();
        }
        Self {
            nrows: n,
            ncols: n,
            indptr,
            indices,
            values,
        }
    }

    /// `self + beta * other`, merged row by row.
    pub fn add_scaled(&self, other: &Self, beta: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (ia, va) = self.row(i);
            let (ib, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ia.len() || q < ib.len() {
                let ca = ia.get(p).copied().unwrap_or(usize::MAX);
                let cb = ib.get(q).copied().unwrap_or(usize::MAX);
                if ca == cb {
                    indices.push(ca);
                    values.push(va[p] + beta * vb[q]);
                    p += 1;
                    q += 1;
                } else if ca < cb {
                    indices.push(ca);
                    values.push(va[p]);
                    p += 1;
                } else {
                    indices.push(cb);
                    values.push(beta * vb[q]);
                    q += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Self {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        dot(x, &ay)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn transpose_and_matvec() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 2, 1.5), (1, 0, -1.0), (1, 1, 2.0)]);
        let t = m.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.get(2, 0), 1.5);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![3.0, 1.0]);
        assert_eq!(m.bandwidth(), 2);
    }

    #[test]
    fn gram_is_bitwise_symmetric() {
        let f = SparseMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, 0.1),
                (0, 1, -0.7),
                (1, 1, 1.0 / 3.0),
                (1, 2, 0.3),
                (2, 0, 2.0 / 7.0),
                (2, 2, 0.9),
            ],
        );
        let g = f.gram();
        assert_eq!(g.max_asymmetry(), 0.0);
        let dense = f.to_dense().transpose() * f.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.get(i, j) - dense[(i, j)]).abs() < 1e-15);
            }
        }
        let s = g.add_scaled(
            &SparseMatrix::from_triplets(3, 3, vec![(1, 1, 1.0), (0, 2, 2.0), (2, 0, 2.0)]),
            0.5,
        );
        assert_eq!(s.max_asymmetry(), 0.0);
        assert!((s.get(1, 1) - dense[(1, 1)] - 0.5).abs() < 1e-15);
    }
}
