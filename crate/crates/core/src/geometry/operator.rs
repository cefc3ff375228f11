//! Discrete vector fields and the sum-of-squares operator `P = sum_j X_j^* X_j`.
//!
//! Each field is discretized twice, once with forward and once with backward
//! one-sided differences, on the box extended by a ghost layer where values
//! are zero. The operator is assembled from the Gram matrices of these
//! factors, `P = 1/2 sum_j (F_j^T F_j + B_j^T B_j)`. The average of the two
//! factors is the centered difference, so `P` is second-order consistent;
//! the Gram form makes it bitwise symmetric and positive semidefinite, and
//! for `X_a = d_a` it reduces to the compact Dirichlet Laplacian.

use super::fields::{VectorField, VectorFieldSet};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::sparse::{norm, SparseMatrix};

/// Centered-difference matrix of `X = sum_a c_a d_a` on `grid`, one-sided
/// on the first and last node of each axis.
pub fn assemble_vector_field(field: &VectorField, grid: &Grid) -> Result<SparseMatrix> {
    check_dim(field.dim(), grid)?;
    let d = grid.dim();
    let n = grid.len();
    let mut trip = Vec::with_capacity(n * (2 * d + 1));
    let mut c = vec![0.0; d];
    for i in 0..n {
        let x = grid.coords(i);
        field.eval_into(&x, &mut c);
        let m = grid.multi_index(i);
        for a in 0..d {
            if c[a] == 0.0 {
                continue;
            }
            let h = grid.spacing()[a];
            let s = grid.strides()[a];
            let last = grid.dims()[a] - 1;
            if m[a] == 0 {
                trip.push((i, i + s, c[a] / h));
                trip.push((i, i, -c[a] / h));
            } else if m[a] == last {
                trip.push((i, i, c[a] / h));
                trip.push((i, i - s, -c[a] / h));
            } else {
                trip.push((i, i + s, c[a] / (2.0 * h)));
                trip.push((i, i - s, -c[a] / (2.0 * h)));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, trip))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Forward,
    Backward,
}

/// One-sided factor with zero ghost values. Rows live on the grid extended
/// by one layer (below for forward, above for backward); empty rows are
/// dropped.
fn one_sided_factor(field: &VectorField, grid: &Grid, side: Side) -> SparseMatrix {
    let d = grid.dim();
    let dims = grid.dims();
    let ext: Vec<usize> = dims.iter().map(|&k| k + 1).collect();
    let ext_len: usize = ext.iter().product();
    let shift: i64 = if side == Side::Forward { -1 } else { 0 };
    let dir: i64 = if side == Side::Forward { 1 } else { -1 };
    let inside = |m: &[i64]| {
        m.iter()
            .zip(dims)
            .all(|(&v, &k)| v >= 0 && (v as usize) < k)
    };
    let to_index = |m: &[i64]| {
        m.iter()
            .zip(grid.strides())
            .map(|(&v, &s)| v as usize * s)
            .sum::<usize>()
    };

    let mut trip = Vec::new();
    let mut row = 0usize;
    let mut m = vec![0i64; d];
    let mut nb = vec![0i64; d];
    let mut c = vec![0.0; d];
    for e in 0..ext_len {
        let mut rem = e;
        for a in (0..d).rev() {
            m[a] = (rem % ext[a]) as i64 + shift;
            rem /= ext[a];
        }
        let x = grid.coord_of_signed(&m);
        field.eval_into(&x, &mut c);
        let here = inside(&m);
        let mut diag = 0.0;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for a in 0..d {
            if c[a] == 0.0 {
                continue;
            }
            let w = c[a] / grid.spacing()[a];
            nb.copy_from_slice(&m);
            nb[a] += dir;
            if inside(&nb) {
                entries.push((to_index(&nb), dir as f64 * w));
            }
            diag -= dir as f64 * w;
        }
        if here && diag != 0.0 {
            entries.push((to_index(&m), diag));
        }
        if entries.is_empty() {
            continue;
        }
        for (j, v) in entries {
            trip.push((row, j, v));
        }
        row += 1;
    }
    SparseMatrix::from_triplets(row, grid.len(), trip)
}

/// Discretization of one field: its centered action and the two one-sided
/// factors used by the quadratic form.
#[derive(Clone, Debug)]
pub struct DiscreteField {
    pub centered: SparseMatrix,
    pub forward: SparseMatrix,
    pub backward: SparseMatrix,
}

impl DiscreteField {
    pub fn new(field: &VectorField, grid: &Grid) -> Result<Self> {
        Ok(Self {
            centered: assemble_vector_field(field, grid)?,
            forward: one_sided_factor(field, grid, Side::Forward),
            backward: one_sided_factor(field, grid, Side::Backward),
        })
    }

    /// `1/2 (|F u|^2 + |B u|^2)`, unweighted.
    pub fn square_norm(&self, u: &[f64]) -> f64 {
        let f = norm(&self.forward.mul_vec(u));
        let b = norm(&self.backward.mul_vec(u));
        0.5 * (f * f + b * b)
    }
}

/// `P_eps = P - eps * Delta_0` on a grid, with its pieces kept apart for
/// energy bookkeeping.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    grid: Grid,
    fields: VectorFieldSet,
    discrete: Vec<DiscreteField>,
    axis_diffs: Vec<SparseMatrix>,
    epsilon: f64,
    fields_part: SparseMatrix,
    laplace_part: SparseMatrix,
    matrix: SparseMatrix,
}

pub fn assemble_sum_of_squares(
    fields: &VectorFieldSet,
    grid: &Grid,
    epsilon: f64,
) -> Result<AssembledOperator> {
    check_dim(fields.dim(), grid)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let n = grid.len();
    let discrete = fields
        .fields()
        .iter()
        .map(|f| DiscreteField::new(f, grid))
        .collect::<Result<Vec<_>>>()?;
    let mut fields_part = SparseMatrix::zeros(n, n);
    for df in &discrete {
        fields_part = fields_part.add_scaled(&df.forward.gram(), 0.5);
        fields_part = fields_part.add_scaled(&df.backward.gram(), 0.5);
    }
    let flat = VectorFieldSet::euclidean(grid.dim());
    let axis_diffs: Vec<SparseMatrix> = flat
        .fields()
        .iter()
        .map(|f| one_sided_factor(f, grid, Side::Forward))
        .collect();
    let mut laplace_part = SparseMatrix::zeros(n, n);
    for dmat in &axis_diffs {
        laplace_part = laplace_part.add_scaled(&dmat.gram(), 1.0);
    }
    let matrix = if epsilon > 0.0 {
        fields_part.add_scaled(&laplace_part, epsilon)
    } else {
        fields_part.clone()
    };
    Ok(AssembledOperator {
        grid: grid.clone(),
        fields: fields.clone(),
        discrete,
        axis_diffs,
        epsilon,
        fields_part,
        laplace_part,
        matrix,
    })
}

impl AssembledOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fields(&self) -> &VectorFieldSet {
        &self.fields
    }

    pub fn discrete_fields(&self) -> &[DiscreteField] {
        &self.discrete
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// `sum_j X_j^T X_j` without the regularization.
    pub fn fields_part(&self) -> &SparseMatrix {
        &self.fields_part
    }

    /// `sum_a D_a^T D_a`, the compact Dirichlet `-Delta_0`.
    pub fn laplace_part(&self) -> &SparseMatrix {
        &self.laplace_part
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(u)
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.matrix.mul_vec_into(u, out)
    }

    /// Weighted `sum_j |X_j u|^2`.
    pub fn fields_energy(&self, u: &[f64]) -> f64 {
        self.grid.weight() * self.discrete.iter().map(|d| d.square_norm(u)).sum::<f64>()
    }

    /// Weighted `|grad u|^2`.
    pub fn gradient_energy(&self, u: &[f64]) -> f64 {
        self.grid.weight()
            * self
                .axis_diffs
                .iter()
                .map(|d| {
                    let v = norm(&d.mul_vec(u));
                    v * v
                })
                .sum::<f64>()
    }

    /// Same fields on a different grid and regularization.
    pub fn reassemble(&self, grid: &Grid, epsilon: f64) -> Result<AssembledOperator> {
        assemble_sum_of_squares(&self.fields, grid, epsilon)
    }
}

/// `sum_j |X_j u|_w^2 + |u|_w^2`, which equals `u^T (P + I) u` weighted.
pub fn h1x_norm(u: &[f64], op: &AssembledOperator) -> Result<f64> {
    if u.len() != op.len() {
        return Err(Error::DimensionMismatch {
            expected: op.len(),
            got: u.len(),
        });
    }
    Ok(op.fields_energy(u) + op.grid().dot_w(u, u))
}

fn check_dim(field_dim: usize, grid: &Grid) -> Result<()> {
    if field_dim != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: field_dim,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn derivative_of_linear_is_exact() {
        let g = build_grid(&[(0.0, 1.0)], &[9]).unwrap();
        let x = VectorFieldSet::euclidean(1);
        let m = assemble_vector_field(x.field(0), &g).unwrap();
        let u = g.sample(|p| p[0]);
        for v in m.mul_vec(&u) {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn grushin_second_field_on_y() {
        let g = build_grid(&[(-1.0, 1.0), (-1.0, 1.0)], &[7, 9]).unwrap();
        let gr = VectorFieldSet::grushin();
        let m = assemble_vector_field(gr.field(1), &g).unwrap();
        let xu = m.mul_vec(&g.sample(|p| p[1]));
        for i in 0..g.len() {
            assert!((xu[i] - g.coords(i)[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn heisenberg_first_field_on_z() {
        let g = build_grid(&[(-1.0, 1.0); 3], &[5, 6, 7]).unwrap();
        let h = VectorFieldSet::heisenberg();
        let m = assemble_vector_field(h.field(0), &g).unwrap();
        let xu = m.mul_vec(&g.sample(|p| p[2]));
        for i in 0..g.len() {
            // symbolic: X_1 z = -y/2
            let expect = h
                .field(0)
                .apply(&crate::geometry::poly::Poly::linear(3, 2, 1.0))
                .eval(&g.coords(i));
            assert!((xu[i] - expect).abs() < 1e-13);
            assert!((expect + 0.5 * g.coords(i)[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn centered_matrix_kills_constants_off_boundary() {
        let g = build_grid(&[(-1.0, 1.0); 3], &[5, 5, 5]).unwrap();
        let h = VectorFieldSet::heisenberg();
        for f in h.fields() {
            let m = assemble_vector_field(f, &g).unwrap();
            let v = m.mul_vec(&vec![1.0; g.len()]);
            assert!(v.iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn euclidean_gives_compact_laplacian() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 1.0)], &[6, 7]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(2), &g, 0.0).unwrap();
        let a = op.matrix();
        let (hx, hy) = (g.spacing()[0], g.spacing()[1]);
        let i = g.index_of(&[2, 3]);
        assert!((a.get(i, i) - (2.0 / (hx * hx) + 2.0 / (hy * hy))).abs() < 1e-9);
        assert!((a.get(i, i + 1) + 1.0 / (hy * hy)).abs() < 1e-9);
        assert!((a.get(i, i + 7) + 1.0 / (hx * hx)).abs() < 1e-9);
        let (idx, val) = a.row(i);
        assert_eq!(idx.len(), 5);
        assert!(val.iter().sum::<f64>().abs() < 1e-9);
        // laplace part equals the fields part for the flat preset
        assert!(
            op.laplace_part()
                .add_scaled(op.fields_part(), -1.0)
                .to_dense()
                .amax()
                < 1e-9
        );
    }

    #[test]
    fn exact_symmetry_for_all_presets() {
        let cases = [
            (
                VectorFieldSet::euclidean(2),
                build_grid(&[(-1.0, 1.0); 2], &[9, 8]).unwrap(),
            ),
            (
                VectorFieldSet::grushin(),
                build_grid(&[(-1.0, 1.0); 2], &[9, 8]).unwrap(),
            ),
            (
                VectorFieldSet::heisenberg(),
                build_grid(&[(-1.0, 1.0); 3], &[6, 5, 7]).unwrap(),
            ),
        ];
        for (f, g) in cases {
            for eps in [0.0, 0.37, 1e-5] {
                let op = assemble_sum_of_squares(&f, &g, eps).unwrap();
                assert_eq!(op.matrix().max_asymmetry(), 0.0);
            }
        }
    }

    #[test]
    fn quadratic_form_is_sum_of_field_norms() {
        let g = build_grid(&[(-1.0, 1.0); 3], &[8, 8, 8]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::heisenberg(), &g, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<f64> = (0..g.len())
            .map(|i| {
                let m = g.multi_index(i);
                if m.iter().all(|&k| (2..6).contains(&k)) {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let lhs = g.weight() * op.matrix().bilinear(&u, &u);
        let rhs = op.fields_energy(&u);
        assert!(lhs >= 0.0);
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        let h1 = h1x_norm(&u, &op).unwrap();
        assert!((h1 - (rhs + g.dot_w(&u, &u))).abs() <= 1e-12 * h1);
    }

    #[test]
    fn h1x_of_zero_and_mismatch() {
        let g = build_grid(&[(0.0, 1.0)], &[5]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &g, 0.0).unwrap();
        assert_eq!(h1x_norm(&[0.0; 5], &op).unwrap(), 0.0);
        assert!(h1x_norm(&[0.0; 4], &op).is_err());
    }

    #[test]
    fn rejects_mismatched_dimension_and_negative_eps() {
        let g = build_grid(&[(0.0, 1.0)], &[5]).unwrap();
        assert!(assemble_sum_of_squares(&VectorFieldSet::grushin(), &g, 0.0).is_err());
        assert!(assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &g, -1.0).is_err());
    }
}
