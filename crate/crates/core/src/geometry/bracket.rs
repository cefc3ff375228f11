//! Rank of the Lie algebra generated by the fields at a point.

use super::fields::{VectorField, VectorFieldSet};
use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;

/// Left-normed bracket `[X_{w0}, [X_{w1}, ... X_{wk}]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketWord(pub Vec<usize>);

impl fmt::Display for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        for (k, j) in self.0.iter().enumerate() {
            if k + 1 < n {
                write!(f, "[X{},", j + 1)?;
            } else {
                write!(f, "X{}", j + 1)?;
            }
        }
        for _ in 1..n {
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub point: Vec<f64>,
    pub depth: usize,
    pub rank: usize,
    pub generators: Vec<BracketWord>,
}

/// Rank of the span of all bracket words of length at most `depth`,
/// evaluated at `point`.
pub fn bracket_rank(fields: &VectorFieldSet, point: &[f64], depth: usize) -> Result<BracketReport> {
    if point.len() != fields.dim() {
        return Err(Error::DimensionMismatch {
            expected: fields.dim(),
            got: point.len(),
        });
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("bracket depth must be >= 1".into()));
    }
    let d = fields.dim();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut generators = Vec::new();
    let mut level: Vec<(BracketWord, VectorField)> = fields
        .fields()
        .iter()
        .enumerate()
        .map(|(j, f)| (BracketWord(vec![j]), f.clone()))
        .collect();
    for k in 1..=depth {
        for (word, field) in &level {
            if basis.len() == d {
                break;
            }
            if try_extend(&mut basis, field.eval(point)) {
                generators.push(word.clone());
            }
        }
        if k == depth || basis.len() == d {
            break;
        }
        let mut next = Vec::new();
        for (j, x) in fields.fields().iter().enumerate() {
            for (word, field) in &level {
                let b = x.bracket(field);
                if b.is_zero() {
                    continue;
                }
                let mut w = vec![j];
                w.extend_from_slice(&word.0);
                next.push((BracketWord(w), b));
            }
        }
        level = next;
    }
    Ok(BracketReport {
        point: point.to_vec(),
        depth,
        rank: basis.len(),
        generators,
    })
}

/// Gram-Schmidt (two passes) against an orthonormal basis.
fn try_extend(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n <= 1e-10 * scale.max(1.0) {
        return false;
    }
    basis.push(v.into_iter().map(|x| x / n).collect());
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_full_rank_at_depth_one() {
        for d in 1..4 {
            let r = bracket_rank(&VectorFieldSet::euclidean(d), &vec![0.3; d], 1).unwrap();
            assert_eq!(r.rank, d);
        }
    }

    #[test]
    fn heisenberg_needs_one_bracket() {
        let h = VectorFieldSet::heisenberg();
        assert_eq!(bracket_rank(&h, &[0.0; 3], 1).unwrap().rank, 2);
        let r = bracket_rank(&h, &[0.0; 3], 2).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.generators.last().unwrap().to_string(), "[X1,X2]");
    }

    #[test]
    fn grushin_degenerates_on_the_axis() {
        let g = VectorFieldSet::grushin();
        assert_eq!(bracket_rank(&g, &[0.0, 0.4], 1).unwrap().rank, 1);
        assert_eq!(bracket_rank(&g, &[0.0, 0.4], 2).unwrap().rank, 2);
        assert_eq!(bracket_rank(&g, &[0.5, 0.4], 1).unwrap().rank, 2);
    }

    #[test]
    fn rank_monotone_in_depth() {
        let g = VectorFieldSet::grushin();
        let mut prev = 0;
        for depth in 1..5 {
            let r = bracket_rank(&g, &[0.0, 0.0], depth).unwrap().rank;
            assert!(r >= prev && r <= 2);
            prev = r;
        }
        assert!(bracket_rank(&g, &[0.0], 1).is_err());
    }
}
