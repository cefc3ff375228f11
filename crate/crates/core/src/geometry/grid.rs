use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Boundary treatment of the box. Values outside the box are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    DirichletTruncated,
}

/// Uniform Cartesian box. Nodes are stored row-major: the last axis varies
/// fastest and node 0 sits at the lower corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    boundary: Boundary,
}

/// Builds a grid with `resolution[a]` nodes on `[lo, hi]` along each axis,
/// both endpoints included.
pub fn build_grid(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<Grid> {
    if bounds.is_empty() {
        return Err(Error::InvalidGrid("no axes".into()));
    }
    if bounds.len() != resolution.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            got: resolution.len(),
        });
    }
    let mut spacing = Vec::with_capacity(bounds.len());
    for (axis, (&(lo, hi), &n)) in bounds.iter().zip(resolution).enumerate() {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid(format!(
                "degenerate box on axis {axis}: [{lo}, {hi}]"
            )));
        }
        if n < 3 {
            return Err(Error::InvalidGrid(format!(
                "resolution {n} < 3 on axis {axis}"
            )));
        }
        spacing.push((hi - lo) / (n - 1) as f64);
    }
    let origin = bounds.iter().map(|b| b.0).collect();
    Ok(Grid::from_parts(resolution.to_vec(), origin, spacing))
}

impl Grid {
    pub(crate) fn from_parts(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for a in (0..dims.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Self {
            dims,
            origin,
            spacing,
            strides,
            boundary: Boundary::DirichletTruncated,
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of one node, `prod h_a`.
    pub fn weight(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.origin[a] + self.spacing[a] * (self.dims[a] - 1) as f64)
            .collect()
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for a in 0..self.dim() {
            out[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        out
    }

    /// Coordinate of a (possibly out-of-box) integer multi-index.
    pub fn coord_of_signed(&self, multi: &[i64]) -> Vec<f64> {
        multi
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + self.spacing[a] * i as f64)
            .collect()
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let m = self.multi_index(idx);
        (0..self.dim())
            .map(|a| self.origin[a] + self.spacing[a] * m[a] as f64)
            .collect()
    }

    /// Node closest to `x`, or `None` when `x` lies outside the box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut multi = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let r = ((x[a] - self.origin[a]) / self.spacing[a]).round();
            if r < 0.0 || r > (self.dims[a] - 1) as f64 {
                return None;
            }
            multi.push(r as usize);
        }
        Some(self.index_of(&multi))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let up = self.upper();
        x.iter()
            .enumerate()
            .all(|(a, &v)| v >= self.origin[a] - 1e-12 && v <= up[a] + 1e-12)
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.coords(i))).collect()
    }

    pub fn dot_w(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weight() * crate::sparse::dot(u, v)
    }

    pub fn norm_w(&self, u: &[f64]) -> f64 {
        self.dot_w(u, u).sqrt()
    }

    /// Same box refined so that spacing is divided by `factor` on each axis.
    pub fn refined(&self, factor: usize) -> Grid {
        let dims = self.dims.iter().map(|&n| (n - 1) * factor + 1).collect();
        let spacing = self.spacing.iter().map(|h| h / factor as f64).collect();
        Grid::from_parts(dims, self.origin.clone(), spacing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_five_nodes() {
        let g = build_grid(&[(0.0, 1.0)], &[5]).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.spacing(), &[0.25]);
        assert_eq!(g.coords(0), vec![0.0]);
    }

    #[test]
    fn square_three_by_three() {
        let g = build_grid(&[(-1.0, 1.0), (-1.0, 1.0)], &[3, 3]).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.spacing(), &[1.0, 1.0]);
        assert_eq!(g.weight(), 1.0);
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(matches!(
            build_grid(&[(0.0, 0.0)], &[5]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            build_grid(&[(0.0, 1.0)], &[2]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(build_grid(&[(0.0, 1.0)], &[5, 5]).is_err());
    }

    #[test]
    fn index_bijection() {
        let g = build_grid(&[(0.0, 1.0), (0.0, 2.0), (-1.0, 0.0)], &[4, 3, 5]).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index_of(&g.multi_index(i)), i);
        }
        assert_eq!(g.nearest_node(&[1.0, 2.0, 0.0]), Some(g.len() - 1));
        assert_eq!(g.nearest_node(&[1.5, 0.0, 0.0]), None);
    }

    #[test]
    fn refinement_keeps_box() {
        let g = build_grid(&[(0.0, 1.0)], &[5]).unwrap();
        let r = g.refined(2);
        assert_eq!(r.len(), 9);
        assert_eq!(r.upper(), g.upper());
    }
}
