//! Multivariate real polynomials and the dense monomial spaces used for
//! configuration files and collocation.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::indices::{binomial, graded_exponents};
use crate::{Error, Result};

/// Sparse polynomial in `n` variables.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    /// The coordinate function `x_i` (0-based).
    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, 1.0);
        p
    }

    pub fn monomial(exponent: Vec<u32>, coeff: f64) -> Self {
        let mut p = Self::zero(exponent.len());
        p.add_term(exponent, coeff);
        p
    }

    /// `Σ x_i²`.
    pub fn norm_squared(n: usize) -> Self {
        (0..n).fold(Self::zero(n), |acc, i| {
            let mut e = vec![0; n];
            e[i] = 2;
            acc + Self::monomial(e, 1.0)
        })
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exponent: Vec<u32>, coeff: f64) {
        assert_eq!(exponent.len(), self.n);
        if coeff == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponent).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&p, &xi)| xi.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * e[i] as f64);
        }
        out
    }

    /// Partial derivative of arbitrary multi-order `alpha`.
    pub fn derivative(&self, alpha: &[usize]) -> Self {
        let mut out = self.clone();
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                out = out.partial(i);
            }
        }
        out
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.n, (0..self.n).map(|i| self.partial(i).eval(x)))
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let di = self.partial(i);
            for j in i..self.n {
                let v = di.partial(j).eval(x);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    /// `p(x - shift)`, expanded.
    pub fn translate(&self, shift: &[f64]) -> Self {
        let mut out = Self::constant(self.n, 0.0);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.n, *c);
            for (i, &p) in e.iter().enumerate() {
                let lin = Self::variable(self.n, i) + Self::constant(self.n, -shift[i]);
                for _ in 0..p {
                    term = &term * &lin;
                }
            }
            out = out + term;
        }
        out
    }
}

impl std::ops::Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n);
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl std::ops::Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        self + rhs.scale(-1.0)
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.n, rhs.n);
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// Dense space of polynomials of total degree `≤ degree`; the basis order is
/// [`graded_exponents`].
#[derive(Debug, Clone)]
pub struct PolynomialSpace {
    pub n: usize,
    pub degree: usize,
    exponents: Vec<Vec<u32>>,
}

impl PolynomialSpace {
    pub fn new(n: usize, degree: usize) -> Self {
        PolynomialSpace {
            n,
            degree,
            exponents: graded_exponents(n, degree),
        }
    }

    pub fn dim(&self) -> usize {
        debug_assert_eq!(
            self.exponents.len(),
            binomial(self.n + self.degree, self.degree)
        );
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn polynomial(&self, coefficients: &[f64]) -> Result<Polynomial> {
        if coefficients.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for degree {} in {} variables, got {}",
                self.dim(),
                self.degree,
                self.n,
                coefficients.len()
            )));
        }
        Ok(Polynomial::from_terms(
            self.n,
            self.exponents
                .iter()
                .cloned()
                .zip(coefficients.iter().copied()),
        ))
    }

    /// Coordinates of `p` in this basis; fails if `p` has larger degree.
    pub fn coefficients(&self, p: &Polynomial) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        for (e, c) in p.terms() {
            let idx = self
                .exponents
                .iter()
                .position(|x| x.as_slice() == e)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("monomial {e:?} outside degree {}", self.degree))
                })?;
            out[idx] = c;
        }
        Ok(out)
    }

    /// Values of every basis monomial at `x`.
    pub fn eval_basis(&self, x: &[f64]) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product())
            .collect()
    }

    /// Values of `∂^alpha` of every basis monomial at `x`.
    pub fn eval_basis_derivative(&self, alpha: &[usize], x: &[f64]) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| {
                let mut v = 1.0;
                for i in 0..self.n {
                    let p = e[i] as usize;
                    let a = alpha[i];
                    if a > p {
                        return 0.0;
                    }
                    let falling: f64 = (0..a).map(|j| (p - j) as f64).product();
                    v *= falling * x[i].powi((p - a) as i32);
                }
                v
            })
            .collect()
    }
}

/// Serialized form of a polynomial: dense coefficients over
/// [`PolynomialSpace`] for the given degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensePolynomial {
    pub degree: usize,
    pub coefficients: Vec<f64>,
}

impl DensePolynomial {
    pub fn to_polynomial(&self, n: usize) -> Result<Polynomial> {
        PolynomialSpace::new(n, self.degree).polynomial(&self.coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_product() {
        let x1x2 = &Polynomial::variable(2, 0) * &Polynomial::variable(2, 1);
        let h = x1x2.hessian(&[0.3, -0.7]);
        assert_eq!(h[(0, 1)], 1.0);
        assert_eq!(h[(0, 0)], 0.0);
        assert_eq!(x1x2.gradient(&[0.3, -0.7]).as_slice(), &[-0.7, 0.3]);
    }

    #[test]
    fn translate_matches_evaluation() {
        let p = PolynomialSpace::new(2, 3)
            .polynomial(&[1.0, -2.0, 0.5, 3.0, 0.0, 1.0, 2.0, -1.0, 0.25, 4.0])
            .unwrap();
        let shift = [0.4, -1.1];
        let q = p.translate(&shift);
        let x = [0.9, 0.2];
        assert!((q.eval(&x) - p.eval(&[x[0] - shift[0], x[1] - shift[1]])).abs() < 1e-12);
    }

    #[test]
    fn basis_derivative_matches_polynomial_derivative() {
        let space = PolynomialSpace::new(3, 3);
        let x = [0.3, -0.2, 1.1];
        let alpha = [1, 0, 2];
        let vals = space.eval_basis_derivative(&alpha, &x);
        for (e, v) in space.exponents().iter().zip(vals) {
            let p = Polynomial::monomial(e.clone(), 1.0);
            assert!((p.derivative(&alpha).eval(&x) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficient_roundtrip() {
        let space = PolynomialSpace::new(2, 2);
        let c = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = space.polynomial(&c).unwrap();
        assert_eq!(space.coefficients(&p).unwrap(), c);
        assert!(space.polynomial(&c[..5]).is_err());
    }
}
