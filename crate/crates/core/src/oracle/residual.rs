//! Finite-difference residuals of the second and higher order equations on
//! grid samples.

use nalgebra::DMatrix;
use serde::Serialize;

use super::collocation::tracefree_symmetric_projector;
use crate::geometry::{
    covariant_hessian, covariant_norm, tracefree, LowerOrderTensor, MetricChart,
};
use crate::indices::tensor_indices;
use crate::stencil::{stencil_reach, GridField};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum ResidualOperator {
    /// `∇_(a∇_b)₀f + f·A_ab` on any chart, measured in the metric norm.
    TracefreeHessian { a: Option<LowerOrderTensor> },
    /// Tracefree part of the `r`-fold derivative on the flat chart.
    FlatTracefreeSymmetric { r: usize },
    /// `∂_(a f_b)₀` for a vector field on the flat chart.
    ConformalKilling,
}

impl ResidualOperator {
    pub fn components(&self, n: usize) -> usize {
        match self {
            ResidualOperator::ConformalKilling => n,
            _ => 1,
        }
    }

    fn order(&self) -> usize {
        match self {
            ResidualOperator::TracefreeHessian { .. } => 2,
            ResidualOperator::FlatTracefreeSymmetric { r } => *r,
            ResidualOperator::ConformalKilling => 1,
        }
    }

    /// Grid nodes lost at each face.
    pub fn margin(&self) -> usize {
        (1..=self.order()).map(stencil_reach).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FdResidual {
    /// `(node, |D(f)|)` for every interior node.
    pub per_node: Vec<(usize, f64)>,
    pub max: f64,
}

/// Evaluates the operator at every node with a full stencil.
pub fn fd_residual(
    chart: &MetricChart,
    fields: &[GridField],
    op: &ResidualOperator,
) -> Result<FdResidual> {
    let n = chart.n;
    if fields.len() != op.components(n) {
        return Err(Error::InvalidArgument(format!(
            "operator needs {} component fields, got {}",
            op.components(n),
            fields.len()
        )));
    }
    let spec = &fields[0].spec;
    if spec.dim() != n
        || fields
            .iter()
            .any(|f| f.spec.dim() != n || f.values.len() != spec.len())
    {
        return Err(Error::InvalidArgument(
            "grid and chart dimensions differ".into(),
        ));
    }
    let flat_only = !matches!(op, ResidualOperator::TracefreeHessian { .. });
    if flat_only && !chart.is_flat() {
        return Err(Error::InvalidArgument(
            "this operator is defined on the flat chart only".into(),
        ));
    }
    let margin = op.margin();
    if spec.points < 2 * margin + 1 {
        return Err(Error::StencilMargin {
            axis: 0,
            needed: margin,
            available: spec.points.saturating_sub(1) / 2,
        });
    }
    let interior = spec.interior(margin);
    let projector = match op {
        ResidualOperator::FlatTracefreeSymmetric { r } => {
            Some(tracefree_symmetric_projector(n, *r))
        }
        _ => None,
    };
    let mut per_node = Vec::with_capacity(interior.len());
    let mut max = 0.0_f64;
    for &node in &interior {
        let v = match op {
            ResidualOperator::TracefreeHessian { a } => {
                let x = spec.node(&spec.unflatten(node));
                let p = chart.conformal_point(&x)?;
                let f = &fields[0];
                let hess =
                    covariant_hessian(&p.christoffel(), &f.gradient(node)?, &f.hessian(node)?);
                let mut d = tracefree(&hess);
                if let Some(a) = a {
                    d += a.value(&x) * f.value(node);
                }
                covariant_norm(&d, p.phi)
            }
            ResidualOperator::FlatTracefreeSymmetric { r } => {
                let idx = tensor_indices(n, *r);
                let mut t = nalgebra::DVector::zeros(idx.len());
                for (k, ix) in idx.iter().enumerate() {
                    let mut alpha = vec![0; n];
                    for &i in ix {
                        alpha[i] += 1;
                    }
                    t[k] = fields[0].partial(node, &alpha)?;
                }
                (projector.as_ref().expect("projector") * t).norm()
            }
            ResidualOperator::ConformalKilling => {
                let mut d = DMatrix::zeros(n, n);
                for (b, f) in fields.iter().enumerate() {
                    let g = f.gradient(node)?;
                    for a in 0..n {
                        d[(a, b)] = g[a];
                    }
                }
                tracefree(&((&d + d.transpose()) * 0.5)).norm()
            }
        };
        max = max.max(v);
        per_node.push((node, v));
    }
    Ok(FdResidual { per_node, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::GridSpec;

    fn grid(n: usize) -> GridSpec {
        GridSpec {
            center: vec![0.1; n],
            half_width: 0.2,
            points: 9,
        }
    }

    #[test]
    fn quadratics_are_exact() {
        // the tracefree Hessian of x₁x₂ is constant with norm √2
        let g = GridField::sample(&grid(2), |x| x[0] * x[1]);
        let r = fd_residual(
            &MetricChart::flat(2),
            &[g],
            &ResidualOperator::FlatTracefreeSymmetric { r: 2 },
        )
        .unwrap();
        assert!(r
            .per_node
            .iter()
            .all(|(_, v)| (v - 2f64.sqrt()).abs() < 1e-12));
        let g = GridField::sample(&grid(2), |x| {
            1.0 + x[0] - 2.0 * x[1] + 0.5 * (x[0] * x[0] + x[1] * x[1])
        });
        let r = fd_residual(
            &MetricChart::flat(2),
            &[g],
            &ResidualOperator::FlatTracefreeSymmetric { r: 2 },
        )
        .unwrap();
        assert!(r.max < 1e-12);
    }

    #[test]
    fn cube_has_residual() {
        let g = GridField::sample(&grid(2), |x| x[0].powi(3));
        let r = fd_residual(
            &MetricChart::flat(2),
            &[g],
            &ResidualOperator::TracefreeHessian { a: None },
        )
        .unwrap();
        // |tracefree diag(6x, 0)| = 6|x|/√2
        let (node, v) = r.per_node[0];
        let x = grid(2).node(&grid(2).unflatten(node));
        assert!((v - 6.0 * x[0].abs() / 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn sphere_constant() {
        let g = GridField::sample(&grid(3), |_| 1.0);
        let chart = MetricChart::sphere(3, 1.0).unwrap();
        let r = fd_residual(
            &chart,
            &[g],
            &ResidualOperator::TracefreeHessian { a: None },
        )
        .unwrap();
        assert!(r.max <= 1e-12);
    }

    #[test]
    fn rotation_is_conformal_killing() {
        let spec = grid(2);
        let f = [
            GridField::sample(&spec, |x| -x[1]),
            GridField::sample(&spec, |x| x[0]),
        ];
        let r = fd_residual(
            &MetricChart::flat(2),
            &f,
            &ResidualOperator::ConformalKilling,
        )
        .unwrap();
        assert!(r.max < 1e-12);
    }
}
