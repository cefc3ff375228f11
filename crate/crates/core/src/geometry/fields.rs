//! Vector fields `X_j = sum_a c_{j,a}(x) d_a` with polynomial coefficients.

use super::poly::Poly;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Euclidean,
    Heisenberg,
    Grushin,
    CustomPolynomial,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Euclidean => "euclidean",
            Preset::Heisenberg => "heisenberg",
            Preset::Grushin => "grushin",
            Preset::CustomPolynomial => "custom-polynomial",
        }
    }
}

/// Names accepted by [`VectorFieldSet::preset`].
pub const PRESET_CATALOG: [(&str, &str); 3] = [
    ("euclidean", "X_a = d_a on R^d; P is the flat Laplacian"),
    (
        "heisenberg",
        "X_1 = d_x - (y/2) d_z, X_2 = d_y + (x/2) d_z on R^3",
    ),
    ("grushin", "X_1 = d_x, X_2 = x d_y on R^2"),
];

/// One row of a custom coefficient table: `coefficient * x^exponents` added
/// to component `axis` of field `field`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTerm {
    pub field: usize,
    pub axis: usize,
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    coeffs: Vec<Poly>,
}

impl VectorField {
    pub fn new(coeffs: Vec<Poly>) -> Self {
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, axis: usize) -> &Poly {
        &self.coeffs[axis]
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c.eval(x);
        }
    }

    /// Applies the field to a scalar polynomial: `sum_a c_a d_a f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim());
        for (a, c) in self.coeffs.iter().enumerate() {
            out = out.add(&c.mul(&f.derivative(a)));
        }
        out
    }

    /// Lie bracket `[self, other]`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let coeffs = (0..self.dim())
            .map(|a| {
                self.apply(other.coeff(a))
                    .add(&other.apply(self.coeff(a)).scale(-1.0))
            })
            .collect();
        VectorField { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }
}

/// The family `X = (X_1, ..., X_r)` on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldSet {
    dim: usize,
    preset: Preset,
    fields: Vec<VectorField>,
}

impl VectorFieldSet {
    pub fn euclidean(dim: usize) -> Self {
        let fields = (0..dim)
            .map(|a| {
                let coeffs = (0..dim)
                    .map(|b| {
                        if a == b {
                            Poly::constant(dim, 1.0)
                        } else {
                            Poly::zero(dim)
                        }
                    })
                    .collect();
                VectorField::new(coeffs)
            })
            .collect();
        Self {
            dim,
            preset: Preset::Euclidean,
            fields,
        }
    }

    pub fn heisenberg() -> Self {
        let one = Poly::constant(3, 1.0);
        let zero = Poly::zero(3);
        let x1 = VectorField::new(vec![one.clone(), zero.clone(), Poly::linear(3, 1, -0.5)]);
        let x2 = VectorField::new(vec![zero, one, Poly::linear(3, 0, 0.5)]);
        Self {
            dim: 3,
            preset: Preset::Heisenberg,
            fields: vec![x1, x2],
        }
    }

    pub fn grushin() -> Self {
        let x1 = VectorField::new(vec![Poly::constant(2, 1.0), Poly::zero(2)]);
        let x2 = VectorField::new(vec![Poly::zero(2), Poly::linear(2, 0, 1.0)]);
        Self {
            dim: 2,
            preset: Preset::Grushin,
            fields: vec![x1, x2],
        }
    }

    /// Looks up a catalog preset; `dim` is only consulted for `euclidean`.
    pub fn preset(name: &str, dim: usize) -> Result<Self> {
        match name {
            "euclidean" => {
                if dim == 0 {
                    return Err(Error::InvalidArgument(
                        "euclidean preset needs dim >= 1".into(),
                    ));
                }
                Ok(Self::euclidean(dim))
            }
            "heisenberg" => Ok(Self::heisenberg()),
            "grushin" => Ok(Self::grushin()),
            other => Err(Error::UnsupportedField(format!(
                "unknown preset \"{other}\""
            ))),
        }
    }

    pub fn from_terms(dim: usize, count: usize, terms: &[FieldTerm]) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(Error::InvalidArgument(
                "custom fields need dim >= 1 and at least one field".into(),
            ));
        }
        let mut coeffs = vec![vec![Poly::zero(dim); dim]; count];
        for t in terms {
            if t.field >= count || t.axis >= dim || t.exponents.len() != dim {
                return Err(Error::UnsupportedField(format!(
                    "term {{field {}, axis {}, exponents {:?}}} does not fit {count} fields on R^{dim}",
                    t.field, t.axis, t.exponents
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::UnsupportedField("non-finite coefficient".into()));
            }
            coeffs[t.field][t.axis].add_term(t.exponents.clone(), t.coefficient);
        }
        Ok(Self {
            dim,
            preset: Preset::CustomPolynomial,
            fields: coeffs.into_iter().map(VectorField::new).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn preset_kind(&self) -> Preset {
        self.preset
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn field(&self, j: usize) -> &VectorField {
        &self.fields[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_bracket_is_vertical() {
        let h = VectorFieldSet::heisenberg();
        let b = h.field(0).bracket(h.field(1));
        assert_eq!(b.eval(&[0.3, -1.2, 5.0]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn grushin_bracket() {
        let g = VectorFieldSet::grushin();
        let b = g.field(0).bracket(g.field(1));
        assert_eq!(b.eval(&[0.0, 0.7]), vec![0.0, 1.0]);
    }

    #[test]
    fn custom_table_matches_preset() {
        let terms = vec![
            FieldTerm {
                field: 0,
                axis: 0,
                exponents: vec![0, 0],
                coefficient: 1.0,
            },
            FieldTerm {
                field: 1,
                axis: 1,
                exponents: vec![1, 0],
                coefficient: 1.0,
            },
        ];
        let c = VectorFieldSet::from_terms(2, 2, &terms).unwrap();
        assert_eq!(c.fields(), VectorFieldSet::grushin().fields());
        let bad = vec![FieldTerm {
            field: 3,
            axis: 0,
            exponents: vec![0, 0],
            coefficient: 1.0,
        }];
        assert!(VectorFieldSet::from_terms(2, 2, &bad).is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!(VectorFieldSet::preset("sphere", 2).is_err());
        assert_eq!(VectorFieldSet::preset("euclidean", 2).unwrap().len(), 2);
    }
}
