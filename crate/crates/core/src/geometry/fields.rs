//! Component fields on a chart and their Levi-Civita covariant derivatives.
//!
//! A covariant tensor of rank `k` is stored as a flat vector of `n^k`
//! components, first index most significant. Derivatives are stored with the
//! derivative index first, so `∇T` of a rank-`k` field is a rank-`k+1` array
//! `(∇T)[c·n^k + I] = ∇_c T_I`.

use nalgebra::{DMatrix, DVector};

use super::chart::MetricChart;
use super::curvature::{tracefree, Christoffel};
use crate::indices::{flatten_tensor_index, tensor_indices};
use crate::polynomial::Polynomial;
use crate::stencil::partial_of;
use crate::{Error, Result};

/// A covariant tensor field with first partial derivatives.
pub trait TensorField {
    fn n(&self) -> usize;
    fn rank(&self) -> usize;
    fn value(&self, x: &[f64]) -> Vec<f64>;
    /// `∂_c T_I`, derivative index first.
    fn partials(&self, x: &[f64]) -> Vec<f64>;
}

/// Covariant tensor field with polynomial components.
#[derive(Debug, Clone)]
pub struct PolynomialTensor {
    pub n: usize,
    pub rank: usize,
    pub components: Vec<Polynomial>,
}

impl PolynomialTensor {
    pub fn new(n: usize, rank: usize, components: Vec<Polynomial>) -> Result<Self> {
        if components.len() != n.pow(rank as u32) || components.iter().any(|p| p.nvars() != n) {
            return Err(Error::InvalidArgument(format!(
                "rank-{rank} tensor in dimension {n} needs {} polynomial components in {n} variables",
                n.pow(rank as u32)
            )));
        }
        Ok(PolynomialTensor {
            n,
            rank,
            components,
        })
    }

    pub fn scalar(p: Polynomial) -> Self {
        PolynomialTensor {
            n: p.nvars(),
            rank: 0,
            components: vec![p],
        }
    }

    /// The exact differential `∂_a p` of a scalar polynomial as a 1-form.
    pub fn differential(p: &Polynomial) -> Self {
        let n = p.nvars();
        PolynomialTensor {
            n,
            rank: 1,
            components: (0..n).map(|i| p.partial(i)).collect(),
        }
    }
}

impl TensorField for PolynomialTensor {
    fn n(&self) -> usize {
        self.n
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    fn partials(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .flat_map(|c| self.components.iter().map(move |p| p.partial(c).eval(x)))
            .collect()
    }
}

/// The metric `g_ab` of a chart as a tensor field with exact derivatives.
pub struct MetricField<'a>(pub &'a MetricChart);

impl TensorField for MetricField<'_> {
    fn n(&self) -> usize {
        self.0.n
    }

    fn rank(&self) -> usize {
        2
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.0
            .metric(x)
            .expect("point in domain")
            .transpose()
            .as_slice()
            .to_vec()
    }

    fn partials(&self, x: &[f64]) -> Vec<f64> {
        self.0.metric_derivative(x).expect("point in domain")
    }
}

/// Wraps a field and replaces its partials by fourth-order central stencils.
pub struct Stenciled<F> {
    pub inner: F,
    pub step: f64,
}

impl<F: TensorField> TensorField for Stenciled<F> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        self.inner.value(x)
    }

    fn partials(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let size = n.pow(self.rank() as u32);
        let mut out = Vec::with_capacity(n * size);
        for c in 0..n {
            let mut alpha = vec![0; n];
            alpha[c] = 1;
            for k in 0..size {
                let f = |y: &[f64]| self.inner.value(y)[k];
                out.push(partial_of(&f, x, &alpha, self.step));
            }
        }
        out
    }
}

/// `∇_c T_{a_1…a_k} = ∂_c T − Σ_j Γ^d_{c a_j} T_{a_1…d…a_k}`.
pub fn covariant_derivative_with(
    gamma: &Christoffel,
    rank: usize,
    value: &[f64],
    partials: &[f64],
) -> Vec<f64> {
    let n = gamma.n;
    let size = n.pow(rank as u32);
    let indices = tensor_indices(n, rank);
    let mut out = partials.to_vec();
    for c in 0..n {
        for (flat, idx) in indices.iter().enumerate() {
            let mut corr = 0.0;
            for slot in 0..rank {
                let mut moved = idx.clone();
                for d in 0..n {
                    moved[slot] = d;
                    corr += gamma.get(d, c, idx[slot]) * value[flatten_tensor_index(n, &moved)];
                }
            }
            out[c * size + flat] -= corr;
        }
    }
    out
}

pub fn covariant_derivative(
    chart: &MetricChart,
    field: &dyn TensorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    if field.n() != chart.n {
        return Err(Error::InvalidArgument(
            "field and chart dimensions differ".into(),
        ));
    }
    let gamma = chart.christoffel(x)?;
    Ok(covariant_derivative_with(
        &gamma,
        field.rank(),
        &field.value(x),
        &field.partials(x),
    ))
}

/// `∇_a∇_b f = ∂_a∂_b f − Γ^c_ab ∂_c f` from the exact gradient and Hessian.
pub fn covariant_hessian(
    gamma: &Christoffel,
    grad: &DVector<f64>,
    hess: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = gamma.n;
    DMatrix::from_fn(n, n, |a, b| {
        hess[(a, b)] - (0..n).map(|c| gamma.get(c, a, b) * grad[c]).sum::<f64>()
    })
}

/// Symmetric tracefree field `A_ab` entering the lower-order term `f·A_ab`.
#[derive(Debug, Clone)]
pub struct LowerOrderTensor {
    pub n: usize,
    /// Components in row-major order, symmetric and tracefree.
    pub components: Vec<Polynomial>,
}

impl LowerOrderTensor {
    pub fn zero(n: usize) -> Self {
        LowerOrderTensor {
            n,
            components: vec![Polynomial::zero(n); n * n],
        }
    }

    /// Builds `A` from components `A_ab`, `a ≤ b`, listed row by row. When
    /// `project` is set the trace part is removed, otherwise a nonzero trace
    /// is rejected. Tracefree with respect to `e^{2φ}δ` coincides with the
    /// Euclidean notion.
    pub fn from_upper(n: usize, upper: Vec<Polynomial>, project: bool) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 || upper.iter().any(|p| p.nvars() != n) {
            return Err(Error::InvalidArgument(format!(
                "A needs {} upper-triangular components in {n} variables",
                n * (n + 1) / 2
            )));
        }
        let mut comps = vec![Polynomial::zero(n); n * n];
        let mut it = upper.into_iter();
        for a in 0..n {
            for b in a..n {
                let p = it.next().expect("count checked");
                comps[b * n + a] = p.clone();
                comps[a * n + b] = p;
            }
        }
        let trace = (0..n).fold(Polynomial::zero(n), |acc, a| acc + comps[a * n + a].clone());
        let scale = comps
            .iter()
            .map(|p| p.max_abs_coefficient())
            .fold(1.0, f64::max);
        if trace.max_abs_coefficient() > 1e-12 * scale {
            if !project {
                return Err(Error::InvalidArgument(
                    "A is not tracefree; enable projection to remove its trace".into(),
                ));
            }
            let part = trace.scale(1.0 / n as f64);
            for a in 0..n {
                comps[a * n + a] = comps[a * n + a].clone() - part.clone();
            }
        }
        Ok(LowerOrderTensor {
            n,
            components: comps,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|p| p.is_zero())
    }

    pub fn as_tensor(&self) -> PolynomialTensor {
        PolynomialTensor {
            n: self.n,
            rank: 2,
            components: self.components.clone(),
        }
    }

    pub fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, b| self.components[a * n + b].eval(x))
    }

    /// `g^{ab}A_ab`.
    pub fn trace(&self, chart: &MetricChart, x: &[f64]) -> Result<f64> {
        let ginv = chart.inverse_metric(x)?;
        Ok((ginv * self.value(x)).trace())
    }

    /// `∇_c A_ab`, derivative index first.
    pub fn covariant_derivative(&self, chart: &MetricChart, x: &[f64]) -> Result<Vec<f64>> {
        covariant_derivative(chart, &self.as_tensor(), x)
    }

    /// `∇^c A_ac = g^{cd} ∇_d A_ac` as a 1-form.
    pub fn divergence(&self, chart: &MetricChart, x: &[f64]) -> Result<DVector<f64>> {
        let n = self.n;
        let nabla = self.covariant_derivative(chart, x)?;
        let ginv = (-2.0 * chart.conformal_point(x)?.phi).exp();
        Ok(DVector::from_fn(n, |a, _| {
            ginv * (0..n).map(|c| nabla[(c * n + a) * n + c]).sum::<f64>()
        }))
    }
}

/// Tracefree part of `∇_a∇_b f` for a polynomial `f`.
pub fn tracefree_hessian(chart: &MetricChart, f: &Polynomial, x: &[f64]) -> Result<DMatrix<f64>> {
    let gamma = chart.christoffel(x)?;
    Ok(tracefree(&covariant_hessian(
        &gamma,
        &f.gradient(x),
        &f.hessian(x),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_hessian_of_product() {
        let chart = MetricChart::flat(2);
        let f = &Polynomial::variable(2, 0) * &Polynomial::variable(2, 1);
        let df = PolynomialTensor::differential(&f);
        let h = covariant_derivative(&chart, &df, &[0.3, 0.8]).unwrap();
        assert_eq!(h, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn metric_is_parallel() {
        let chart = MetricChart::sphere(3, 1.3).unwrap();
        let x = [0.4, -0.9, 1.2];
        let ng = covariant_derivative(&chart, &MetricField(&chart), &x).unwrap();
        assert!(ng.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn stenciled_partials_agree() {
        let chart = MetricChart::sphere(2, 1.0).unwrap();
        let p = Polynomial::from_terms(2, [(vec![2, 1], 1.0), (vec![0, 3], -0.5)]);
        let exact = PolynomialTensor::differential(&p);
        let fd = Stenciled {
            inner: exact.clone(),
            step: 1e-2,
        };
        let x = [0.2, 0.7];
        let a = covariant_derivative(&chart, &exact, &x).unwrap();
        let b = covariant_derivative(&chart, &fd, &x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn lower_order_tensor_projection() {
        let n = 2;
        let x1 = Polynomial::variable(n, 0);
        let upper = vec![x1.clone(), Polynomial::zero(n), Polynomial::zero(n)];
        assert!(LowerOrderTensor::from_upper(n, upper.clone(), false).is_err());
        let a = LowerOrderTensor::from_upper(n, upper, true).unwrap();
        let chart = MetricChart::flat(n);
        let v = a.value(&[0.6, 0.0]);
        assert!((v[(0, 0)] - 0.3).abs() < 1e-15 && (v[(1, 1)] + 0.3).abs() < 1e-15);
        assert!(a.trace(&chart, &[0.6, 0.1]).unwrap().abs() < 1e-15);
    }
}
