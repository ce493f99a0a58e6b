//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α` of a function around a
//! base point `x0`, `f(x0 + y) = Σ_{|α| ≤ K} c_α y^α`. Products, quotients and
//! elementary functions act on the truncated series exactly, so iterated
//! derivatives evaluated at `x0` carry no discretisation error as long as the
//! total number of differentiations does not exceed `K`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::indices::graded_exponents;
use crate::polynomial::Polynomial;

#[derive(Debug)]
pub struct JetSpace {
    n: usize,
    order: usize,
    exponents: Vec<Vec<u32>>,
    /// (i, j, k): monomial_i · monomial_j = monomial_k
    products: Vec<(usize, usize, usize)>,
    /// Per variable: (target, source, factor) for `∂_var`.
    derivatives: Vec<Vec<(usize, usize, f64)>>,
    factorials: Vec<f64>,
}

impl JetSpace {
    pub fn new(n: usize, order: usize) -> Arc<Self> {
        let exponents = graded_exponents(n, order);
        let index: HashMap<Vec<u32>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            let da: u32 = a.iter().sum();
            for (j, b) in exponents.iter().enumerate() {
                let db: u32 = b.iter().sum();
                if (da + db) as usize > order {
                    continue;
                }
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i, j, index[&sum]));
            }
        }
        let derivatives = (0..n)
            .map(|var| {
                exponents
                    .iter()
                    .enumerate()
                    .filter_map(|(target, e)| {
                        let mut src = e.clone();
                        src[var] += 1;
                        index.get(&src).map(|&s| (target, s, src[var] as f64))
                    })
                    .collect()
            })
            .collect();
        let factorials = exponents
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&p| (1..=p).map(f64::from).product::<f64>())
                    .product()
            })
            .collect();
        Arc::new(JetSpace {
            n,
            order,
            exponents,
            products,
            derivatives,
            factorials,
        })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        // Graded blocks are small; a scan keeps the struct lean.
        self.exponents.iter().position(|e| e.as_slice() == alpha)
    }
}

#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Jet {
            space: space.clone(),
            coeffs: vec![0.0; space.len()],
        }
    }

    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Self {
        let mut j = Self::zero(space);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function `x_i` expanded at a point whose `i`-th
    /// coordinate is `at`.
    pub fn variable(space: &Arc<JetSpace>, i: usize, at: f64) -> Self {
        let mut j = Self::constant(space, at);
        if space.order >= 1 {
            j.coeffs[1 + i] = 1.0;
        }
        j
    }

    /// Taylor expansion of a polynomial at `x0`.
    pub fn from_polynomial(space: &Arc<JetSpace>, p: &Polynomial, x0: &[f64]) -> Self {
        let neg: Vec<f64> = x0.iter().map(|v| -v).collect();
        let shifted = p.translate(&neg);
        let mut j = Self::zero(space);
        for (e, c) in shifted.terms() {
            if e.iter().sum::<u32>() as usize > space.order {
                continue;
            }
            let idx = space.index_of(e).expect("exponent within order");
            j.coeffs[idx] += c;
        }
        j
    }

    /// Jet with coefficients `∂^α f(x0)/α!` from a table of partials.
    pub fn from_partials<F: FnMut(&[u32]) -> f64>(space: &Arc<JetSpace>, mut partial: F) -> Self {
        let coeffs = space
            .exponents
            .iter()
            .zip(&space.factorials)
            .map(|(e, f)| partial(e) / f)
            .collect();
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Function value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `∂^α f(x0)`.
    pub fn partial_value(&self, alpha: &[u32]) -> f64 {
        match self.space.index_of(alpha) {
            Some(i) => self.coeffs[i] * self.space.factorials[i],
            None => 0.0,
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for &(t, s, f) in &self.space.derivatives[var] {
            out.coeffs[t] = f * self.coeffs[s];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Apply `g(c0 + u) = Σ_k a_k u^k` where `a_k` are the Taylor
    /// coefficients of `g` at the base value.
    fn compose(&self, series: &[f64]) -> Self {
        let mut nil = self.clone();
        nil.coeffs[0] = 0.0;
        let mut out = Self::constant(&self.space, series[0]);
        let mut power = Self::constant(&self.space, 1.0);
        for a in series.iter().skip(1) {
            power = &power * &nil;
            if power.is_zero() {
                break;
            }
            out.add_scaled(&power, *a);
        }
        out
    }

    pub fn exp(&self) -> Self {
        let c = self.coeffs[0].exp();
        let mut series = vec![c; self.space.order + 1];
        let mut fact = 1.0;
        for (k, s) in series.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *s = c / fact;
        }
        self.compose(&series)
    }

    /// Natural logarithm; the base value must be positive.
    pub fn ln(&self) -> Self {
        let c = self.coeffs[0];
        let mut series = vec![c.ln(); self.space.order + 1];
        for (k, s) in series.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *s = sign / (k as f64 * c.powi(k as i32));
        }
        self.compose(&series)
    }

    pub fn recip(&self) -> Self {
        let c = self.coeffs[0];
        let series: Vec<f64> = (0..=self.space.order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / c.powi(k as i32 + 1)
            })
            .collect();
        self.compose(&series)
    }
}

impl std::ops::Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl std::ops::Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl std::ops::Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut out = Jet::zero(&self.space);
        for &(i, j, k) in &self.space.products {
            out.coeffs[k] += self.coeffs[i] * rhs.coeffs[j];
        }
        out
    }
}
