//! Multivariate polynomials with real coefficients, enough to carry vector
//! field coefficients and their Lie brackets symbolically.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    /// `c * x_axis`.
    pub fn linear(nvars: usize, axis: usize, c: f64) -> Self {
        let mut e = vec![0; nvars];
        e[axis] = 1;
        Self::monomial(nvars, e, c)
    }

    pub fn monomial(nvars: usize, exponents: Vec<u32>, c: f64) -> Self {
        assert_eq!(exponents.len(), nvars);
        let mut p = Self::zero(nvars);
        p.add_term(exponents, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn derivative(&self, axis: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, &c) in &self.terms {
            if e[axis] > 0 {
                let mut d = e.clone();
                d[axis] -= 1;
                out.add_term(d, c * e[axis] as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_eval() {
        let x = Poly::linear(2, 0, 1.0);
        let y = Poly::linear(2, 1, 1.0);
        let p = x.mul(&y).add(&Poly::constant(2, 2.0));
        assert_eq!(p.eval(&[3.0, 4.0]), 14.0);
        assert_eq!(p.derivative(0), y);
        assert!(Poly::constant(2, 5.0).derivative(1).is_zero());
        assert!(x.add(&x.scale(-1.0)).is_zero());
    }
}
