//! Closed first order systems `∇̃Σ + C(Σ) = 0`.
//!
//! Two cases carry complete data: the standard representation with
//! `D(f) = ∇_(a∇_b)₀f + f·A_ab` on any chart, where
//!
//! ```text
//! ∇_a h − (1/(n−1))(Q_a^d φ_d + f ∇^c A_ac + φ^c A_ac) = 0
//! ∇_a φ_b + h g_ab + f A_ab = 0
//! ∇_a f − φ_a = 0
//! ```
//!
//! with `Q_a^d = g^{bc}R_ab^d_c`, and any module on the flat chart, where
//! `C ≡ 0`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::section::frame_connection;
use crate::algebra::{AlgebraContext, ModuleFamily};
use crate::geometry::{LowerOrderTensor, MetricChart};
use crate::linalg::hstack;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum SystemKind {
    FlatZero,
    ExplicitEinstein { a: LowerOrderTensor },
}

/// Provenance tag reported alongside results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FlatZero,
    ExplicitEinstein,
}

#[derive(Debug, Clone)]
pub struct ClosedSystem {
    pub chart: MetricChart,
    pub ctx: Arc<AlgebraContext>,
    pub kind: SystemKind,
}

impl ClosedSystem {
    pub fn flat(ctx: Arc<AlgebraContext>, chart: MetricChart) -> Result<Self> {
        if !chart.is_flat() {
            return Err(Error::InvalidArgument(
                "the flat closed system requires the flat chart".into(),
            ));
        }
        if chart.n != ctx.n() {
            return Err(Error::InvalidArgument(
                "chart and module dimensions differ".into(),
            ));
        }
        Ok(ClosedSystem {
            chart,
            ctx,
            kind: SystemKind::FlatZero,
        })
    }

    /// The explicit system for the standard representation.
    pub fn einstein(
        ctx: Arc<AlgebraContext>,
        chart: MetricChart,
        a: LowerOrderTensor,
    ) -> Result<Self> {
        let n = ctx.n();
        if ctx.module.family != (ModuleFamily::Scalar { r: 2 }) {
            return Err(Error::InvalidArgument(format!(
                "the explicit closed system needs the standard representation, got {}",
                ctx.module.family.label()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(
                "the explicit closed system needs n ≥ 2".into(),
            ));
        }
        if chart.n != n || a.n != n || a.components.len() != n * n {
            return Err(Error::InvalidArgument(
                "chart, A and module dimensions differ".into(),
            ));
        }
        // re-validate symmetry and trace of A
        let upper = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .map(|(i, j)| a.components[i * n + j].clone())
            .collect();
        let checked = LowerOrderTensor::from_upper(n, upper, false)?;
        for i in 0..n {
            for j in 0..n {
                let d = a.components[i * n + j].clone() - checked.components[i * n + j].clone();
                if d.max_abs_coefficient() > 1e-12 {
                    return Err(Error::InvalidArgument("A is not symmetric".into()));
                }
            }
        }
        Ok(ClosedSystem {
            chart,
            ctx,
            kind: SystemKind::ExplicitEinstein { a },
        })
    }

    pub fn provenance(&self) -> Provenance {
        match self.kind {
            SystemKind::FlatZero => Provenance::FlatZero,
            SystemKind::ExplicitEinstein { .. } => Provenance::ExplicitEinstein,
        }
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn dim(&self) -> usize {
        self.ctx.module.dim
    }

    /// `C(·)(∂_a)` for each coordinate direction, acting on frame components.
    pub fn c_matrices(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let n = self.n();
        let dim = self.dim();
        match &self.kind {
            SystemKind::FlatZero => {
                self.chart.check_domain(x)?;
                Ok(vec![DMatrix::zeros(dim, dim); n])
            }
            SystemKind::ExplicitEinstein { a } => {
                let p = self.chart.conformal_point(x)?;
                let q = p.riemann().contracted(p.phi);
                let av = a.value(x);
                let div = if a.is_zero() {
                    nalgebra::DVector::zeros(n)
                } else {
                    a.divergence(&self.chart, x)?
                };
                let e = p.phi.exp();
                let k = 1.0 / (n as f64 - 1.0);
                let bottom = n + 1;
                Ok((0..n)
                    .map(|i| {
                        let mut c = DMatrix::zeros(dim, dim);
                        for d in 0..n {
                            c[(0, 1 + d)] = -k * e * (q[(i, d)] + av[(i, d)] / (e * e));
                            c[(1 + d, bottom)] = av[(i, d)] / e;
                        }
                        c[(0, bottom)] = -k * div[i];
                        c
                    })
                    .collect())
            }
        }
    }

    /// `C` at `x` as a `dim W × (n·dim W)` array `[C(∂_1) | … | C(∂_n)]`.
    pub fn bundle_map(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let cs = self.c_matrices(x)?;
        Ok(hstack(&cs.iter().collect::<Vec<_>>()))
    }

    /// `M_a` with `∂_aΣ + M_aΣ = 0` for parallel sections of the prolonged
    /// connection, frame components.
    pub fn connection_matrices(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let p = self.chart.conformal_point(x)?;
        let e = p.phi.exp();
        let cs = self.c_matrices(x)?;
        Ok(cs
            .into_iter()
            .enumerate()
            .map(|(a, c)| {
                let mut m = c + self.ctx.module.lowering(a) * e;
                if !self.chart.is_flat() {
                    m += frame_connection(&self.ctx, &p.grad, a);
                }
                m
            })
            .collect())
    }

    /// `F_ab = ∂_aM_b − ∂_bM_a + [M_a, M_b]` with `∂` by central stencils.
    pub fn curvature_fd(&self, x: &[f64], h: f64) -> Result<Vec<Vec<DMatrix<f64>>>> {
        let n = self.n();
        let m = self.connection_matrices(x)?;
        let weights = crate::stencil::central_weights(1);
        let mut dm = Vec::with_capacity(n);
        for a in 0..n {
            let mut acc = vec![DMatrix::zeros(self.dim(), self.dim()); n];
            for &(o, w) in weights {
                let mut y = x.to_vec();
                y[a] += o as f64 * h;
                for (t, mb) in acc.iter_mut().zip(self.connection_matrices(&y)?) {
                    *t += mb * (w / h);
                }
            }
            dm.push(acc);
        }
        Ok((0..n)
            .map(|a| {
                (0..n)
                    .map(|b| &dm[a][b] - &dm[b][a] + &m[a] * &m[b] - &m[b] * &m[a])
                    .collect()
            })
            .collect())
    }
}

/// Largest entry of `F_ab − ρ(R_ab)` at `x`, where `F` is the curvature of
/// `∇̃` itself (no `C`) obtained by finite differences with step `h`, and
/// `ρ(R_ab) = Σ_{k<l} R_ab^k_l ρ(A_kl)` is the componentwise action of the
/// Riemann tensor.
pub fn modified_connection_curvature_defect(
    ctx: Arc<AlgebraContext>,
    chart: &MetricChart,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    let n = ctx.n();
    if chart.n != n {
        return Err(Error::InvalidArgument(
            "chart and module dimensions differ".into(),
        ));
    }
    let bare = ClosedSystem {
        chart: chart.clone(),
        ctx: ctx.clone(),
        kind: SystemKind::FlatZero,
    };
    let f = bare.curvature_fd(x, h)?;
    let r = chart.riemann(x)?;
    let mut worst = 0.0_f64;
    for a in 0..n {
        for b in 0..n {
            let mut expect = DMatrix::zeros(bare.dim(), bare.dim());
            for k in 0..n {
                for l in k + 1..n {
                    expect += ctx.module.rotation(&ctx.algebra, k, l) * r.get(a, b, k, l);
                }
            }
            worst = worst.max((&f[a][b] - expect).amax());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::Polynomial;

    fn standard(n: usize) -> Arc<AlgebraContext> {
        Arc::new(AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap())
    }

    #[test]
    fn flat_einstein_has_zero_c() {
        let s =
            ClosedSystem::einstein(standard(3), MetricChart::flat(3), LowerOrderTensor::zero(3))
                .unwrap();
        assert_eq!(s.bundle_map(&[0.1, 0.2, 0.3]).unwrap().amax(), 0.0);
    }

    #[test]
    fn middle_row_is_f_times_a() {
        let n = 3;
        let x1 = Polynomial::variable(n, 0);
        let z = Polynomial::zero(n);
        let a = LowerOrderTensor::from_upper(
            n,
            vec![x1, z.clone(), z.clone(), z.clone(), z.clone(), z],
            true,
        )
        .unwrap();
        let s = ClosedSystem::einstein(standard(n), MetricChart::flat(n), a.clone()).unwrap();
        let x = [0.6, -0.2, 0.1];
        let av = a.value(&x);
        let cs = s.c_matrices(&x).unwrap();
        for i in 0..n {
            for b in 0..n {
                assert!((cs[i][(1 + b, n + 1)] - av[(i, b)]).abs() < 1e-15);
            }
            assert!(cs[i].row(n + 1).amax() == 0.0);
        }
    }

    #[test]
    fn rejects_other_modules_and_charts() {
        let adj = Arc::new(AlgebraContext::new(3, ModuleFamily::Adjoint).unwrap());
        assert!(
            ClosedSystem::einstein(adj, MetricChart::flat(3), LowerOrderTensor::zero(3)).is_err()
        );
        let sphere = MetricChart::sphere(3, 1.0).unwrap();
        assert!(ClosedSystem::flat(standard(3), sphere).is_err());
    }

    #[test]
    fn sphere_bottom_row_is_zero() {
        let s = ClosedSystem::einstein(
            standard(3),
            MetricChart::sphere(3, 1.0).unwrap(),
            LowerOrderTensor::zero(3),
        )
        .unwrap();
        let cs = s.c_matrices(&[0.2, -0.5, 0.9]).unwrap();
        for c in &cs {
            assert_eq!(c.row(4).amax(), 0.0);
            assert!(c.row(0).amax() > 0.0);
        }
    }
}
