//! Brute-force solution spaces: impose `D(p)(x_s) = 0` on a polynomial
//! ansatz at random sample points and take the numerical nullspace.
//!
//! Completeness relies on a degree bound: on the flat model parallel
//! sections of the prolonged connection are polynomial of degree `≤ N`, so
//! every solution of the `r`-th order equation has degree `≤ 2(r−1)`.
//! [`collocation_with_margin`] reruns at one degree higher to confirm that no
//! further solutions appear.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::indices::{euclidean_trace, flatten_tensor_index, symmetrizer, tensor_indices};
use crate::linalg::{column_space, null_space, SingularSplit};
use crate::polynomial::{Polynomial, PolynomialSpace};
use crate::{Error, Result};

/// Which equation the collocation system encodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum CollocationOperator {
    /// Tracefree part of the `r`-fold derivative of a scalar on flat space.
    FlatScalar { r: usize },
    /// `∂_(a f_b)₀ = 0` for a vector field on flat space.
    FlatConformalKilling,
    /// `∇_(a∇_b)₀ f = 0` on the stereographic sphere of the given radius,
    /// with the ansatz `f = p/(ρ²+|x|²)`.
    SphereTracefreeHessian { radius: f64 },
}

impl CollocationOperator {
    /// Degree that suffices for completeness of the ansatz.
    pub fn natural_degree(&self) -> usize {
        match self {
            CollocationOperator::FlatScalar { r } => 2 * r.saturating_sub(1),
            CollocationOperator::FlatConformalKilling => 2,
            CollocationOperator::SphereTracefreeHessian { .. } => 2,
        }
    }

    /// Number of polynomial components of the unknown.
    pub fn components(&self, n: usize) -> usize {
        match self {
            CollocationOperator::FlatConformalKilling => n,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CollocationOptions {
    pub seed: u64,
    /// Samples per unknown coefficient, at least 3.
    pub oversampling: usize,
    /// Samples are drawn uniformly from `[−box, box]^n`.
    pub sample_box: f64,
    /// Singular values below `relative_threshold·σ_max` are discarded.
    pub relative_threshold: f64,
    /// Required ratio between the smallest kept and largest discarded value.
    pub min_gap: f64,
}

impl Default for CollocationOptions {
    fn default() -> Self {
        CollocationOptions {
            seed: 7,
            oversampling: 3,
            sample_box: 1.0,
            relative_threshold: 1e-8,
            min_gap: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Nullspace {
    pub dimension: usize,
    pub degree: usize,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// Orthonormal coefficient vectors; for vector-valued unknowns the
    /// components are concatenated.
    pub basis_coefficients: Vec<Vec<f64>>,
}

impl Nullspace {
    /// Basis element `k` as polynomials, one per component.
    pub fn polynomials(&self, n: usize, k: usize) -> Result<Vec<Polynomial>> {
        let space = PolynomialSpace::new(n, self.degree);
        self.basis_coefficients[k]
            .chunks(space.dim())
            .map(|c| space.polynomial(c))
            .collect()
    }
}

/// Orthogonal projector onto tracefree symmetric tensors in `⊗^r ℝ^n`.
pub fn tracefree_symmetric_projector(n: usize, r: usize) -> DMatrix<f64> {
    let sym = symmetrizer(n, r);
    if r < 2 {
        return sym;
    }
    let b = column_space(&sym);
    let k = null_space(&(euclidean_trace(n, r) * &b));
    let q = b * k;
    &q * q.transpose()
}

fn samples(n: usize, count: usize, opts: &CollocationOptions) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| rng.gen_range(-opts.sample_box..opts.sample_box))
                .collect()
        })
        .collect()
}

/// Rows `D(basis)(x)` for one sample point; columns are unknowns.
fn rows_at(
    n: usize,
    op: &CollocationOperator,
    space: &PolynomialSpace,
    projector: &DMatrix<f64>,
    x: &[f64],
) -> DMatrix<f64> {
    let m = space.dim();
    match *op {
        CollocationOperator::FlatScalar { r } => {
            let idx = tensor_indices(n, r);
            let mut raw = DMatrix::zeros(idx.len(), m);
            for (row, t) in idx.iter().enumerate() {
                let mut alpha = vec![0; n];
                for &i in t {
                    alpha[i] += 1;
                }
                for (col, v) in space
                    .eval_basis_derivative(&alpha, x)
                    .into_iter()
                    .enumerate()
                {
                    raw[(row, col)] = v;
                }
            }
            projector * raw
        }
        CollocationOperator::FlatConformalKilling => {
            let mut raw = DMatrix::zeros(n * n, n * m);
            for a in 0..n {
                let mut alpha = vec![0; n];
                alpha[a] = 1;
                let d = space.eval_basis_derivative(&alpha, x);
                for b in 0..n {
                    // ∂_a f_b
                    for (k, v) in d.iter().enumerate() {
                        raw[(flatten_tensor_index(n, &[a, b]), b * m + k)] = *v;
                    }
                }
            }
            projector * raw
        }
        CollocationOperator::SphereTracefreeHessian { radius } => {
            // f = p/s with s = ρ²+|x|²; Γ^c_ab for φ = log(2ρ²/s)
            let s = radius * radius + x.iter().map(|v| v * v).sum::<f64>();
            let dphi: Vec<f64> = x.iter().map(|v| -2.0 * v / s).collect();
            let p0 = space.eval_basis(x);
            let p1: Vec<Vec<f64>> = (0..n)
                .map(|a| {
                    let mut al = vec![0; n];
                    al[a] = 1;
                    space.eval_basis_derivative(&al, x)
                })
                .collect();
            let mut raw = DMatrix::zeros(n * n, m);
            for a in 0..n {
                for b in 0..n {
                    let mut al = vec![0; n];
                    al[a] += 1;
                    al[b] += 1;
                    let p2 = space.eval_basis_derivative(&al, x);
                    let (sa, sb) = (2.0 * x[a], 2.0 * x[b]);
                    let sab = if a == b { 2.0 } else { 0.0 };
                    for k in 0..m {
                        let fa = |c: usize| p1[c][k] / s - p0[k] * 2.0 * x[c] / (s * s);
                        let fab = p2[k] / s
                            - (p1[a][k] * sb + p1[b][k] * sa) / (s * s)
                            - p0[k] * sab / (s * s)
                            + 2.0 * p0[k] * sa * sb / (s * s * s);
                        // Γ^c_ab = δ^c_a φ_b + δ^c_b φ_a − δ_ab φ_c
                        let mut corr = dphi[b] * fa(a) + dphi[a] * fa(b);
                        if a == b {
                            corr -= (0..n).map(|c| dphi[c] * fa(c)).sum::<f64>();
                        }
                        raw[(a * n + b, k)] = fab - corr;
                    }
                }
            }
            projector * raw
        }
    }
}

/// Numerical nullspace of the collocation system at polynomial degree
/// `degree`.
pub fn collocation_nullspace(
    n: usize,
    op: &CollocationOperator,
    degree: usize,
    opts: &CollocationOptions,
) -> Result<Nullspace> {
    if n < 1 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if opts.oversampling < 3 {
        return Err(Error::InvalidArgument(
            "at least 3 samples per unknown are required".into(),
        ));
    }
    if let CollocationOperator::FlatScalar { r } = op {
        if *r < 1 {
            return Err(Error::InvalidArgument(
                "operator order must be at least 1".into(),
            ));
        }
    }
    let space = PolynomialSpace::new(n, degree);
    let unknowns = op.components(n) * space.dim();
    let projector = match op {
        CollocationOperator::FlatScalar { r } => tracefree_symmetric_projector(n, *r),
        _ => tracefree_symmetric_projector(n, 2),
    };
    let pts = samples(n, opts.oversampling * unknowns, opts);
    let blocks: Vec<DMatrix<f64>> = pts
        .iter()
        .map(|x| rows_at(n, op, &space, &projector, x))
        .collect();
    let per = blocks[0].nrows();
    let mut m = DMatrix::zeros(per * blocks.len(), unknowns);
    for (i, b) in blocks.iter().enumerate() {
        m.view_mut((i * per, 0), (per, unknowns)).copy_from(b);
    }
    let split = SingularSplit::relative(&m, opts.relative_threshold);
    if let Some(ratio) = split.gap_ratio() {
        if ratio < opts.min_gap {
            return Err(Error::RankUnstable {
                ratio,
                required: opts.min_gap,
            });
        }
    }
    let kernel = split.kernel();
    Ok(Nullspace {
        dimension: kernel.ncols(),
        degree,
        singular_values: split.svd.singular_values.clone(),
        basis_coefficients: kernel
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect(),
    })
}

/// Runs at the natural degree and one above; the dimensions must agree.
pub fn collocation_with_margin(
    n: usize,
    op: &CollocationOperator,
    opts: &CollocationOptions,
) -> Result<(Nullspace, Nullspace)> {
    let d = op.natural_degree();
    let base = collocation_nullspace(n, op, d, opts)?;
    let above = collocation_nullspace(n, op, d + 1, opts)?;
    if base.dimension != above.dimension {
        return Err(Error::Invariant(format!(
            "collocation dimension grows from {} at degree {d} to {} at degree {}",
            base.dimension,
            above.dimension,
            d + 1
        )));
    }
    Ok((base, above))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projector_ranks() {
        let p = tracefree_symmetric_projector(3, 2);
        assert!((p.trace() - 5.0).abs() < 1e-12);
        let p = tracefree_symmetric_projector(2, 3);
        assert!((p.trace() - 2.0).abs() < 1e-12);
        assert!((&p * &p - &p).amax() < 1e-12);
    }

    #[test]
    fn flat_hessian_dimensions() {
        let opts = CollocationOptions::default();
        for (n, dim) in [(2, 4), (3, 5)] {
            let ns = collocation_nullspace(n, &CollocationOperator::FlatScalar { r: 2 }, 2, &opts)
                .unwrap();
            assert_eq!(ns.dimension, dim);
        }
    }

    #[test]
    fn third_order_dimension() {
        let (a, b) = collocation_with_margin(
            2,
            &CollocationOperator::FlatScalar { r: 3 },
            &CollocationOptions::default(),
        )
        .unwrap();
        assert_eq!((a.dimension, b.dimension), (9, 9));
    }

    #[test]
    fn conformal_killing_dimensions() {
        let opts = CollocationOptions::default();
        for (n, dim) in [(3, 10), (4, 15)] {
            let ns = collocation_nullspace(n, &CollocationOperator::FlatConformalKilling, 2, &opts)
                .unwrap();
            assert_eq!(ns.dimension, dim);
        }
    }

    #[test]
    fn sphere_dimension() {
        let (a, _) = collocation_with_margin(
            3,
            &CollocationOperator::SphereTracefreeHessian { radius: 1.0 },
            &CollocationOptions::default(),
        )
        .unwrap();
        assert_eq!(a.dimension, 5);
    }

    #[test]
    fn flat_hessian_basis_spans_expected_functions() {
        let n = 3;
        let ns = collocation_nullspace(
            n,
            &CollocationOperator::FlatScalar { r: 2 },
            2,
            &Default::default(),
        )
        .unwrap();
        let space = PolynomialSpace::new(n, 2);
        let basis = DMatrix::from_fn(space.dim(), ns.dimension, |i, j| {
            ns.basis_coefficients[j][i]
        });
        let mut expected: Vec<Polynomial> = (0..n).map(|i| Polynomial::variable(n, i)).collect();
        expected.push(Polynomial::constant(n, 1.0));
        expected.push(Polynomial::norm_squared(n));
        for p in expected {
            let c = nalgebra::DVector::from_vec(space.coefficients(&p).unwrap());
            let resid = &c - &basis * (basis.transpose() * &c);
            assert!(resid.amax() < 1e-10);
        }
    }
}
