//! Tracefree Ricci curvature of conformal rescalings `ĝ = f⁻²g`.

use nalgebra::{DMatrix, DVector};

use super::chart::MetricChart;
use super::curvature::{covariant_norm, ConformalPoint, CurvatureSummary};
use crate::polynomial::Polynomial;
use crate::stencil::GridField;
use crate::{Error, Result};

/// Value, gradient and Hessian of a scalar field at one point.
#[derive(Debug, Clone)]
pub struct ScalarSample {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl ScalarSample {
    pub fn from_polynomial(p: &Polynomial, x: &[f64]) -> Self {
        ScalarSample {
            x: x.to_vec(),
            value: p.eval(x),
            gradient: p.gradient(x),
            hessian: p.hessian(x),
        }
    }

    /// Stencil derivatives at a grid node.
    pub fn from_grid(field: &GridField, flat: usize) -> Result<Self> {
        Ok(ScalarSample {
            x: field.spec.node(&field.spec.unflatten(flat)),
            value: field.value(flat),
            gradient: field.gradient(flat)?,
            hessian: field.hessian(flat)?,
        })
    }
}

/// 2-jet of `φ̂ = φ − log f`, the conformal factor of `f⁻²e^{2φ}δ`.
pub fn rescaled_point(base: &ConformalPoint, f: &ScalarSample) -> ConformalPoint {
    let v = f.value;
    let g = &f.gradient;
    ConformalPoint {
        n: base.n,
        phi: base.phi - v.ln(),
        grad: &base.grad - g / v,
        hess: &base.hess - &f.hessian / v + g * g.transpose() / (v * v),
    }
}

/// Largest `|Ric⁰(ĝ)|_ĝ` over the samples.
///
/// `threshold` defaults to `0.3·max|f|`; any sample with `f ≤ threshold` is
/// rejected.
pub fn einstein_residual_of_rescaling(
    chart: &MetricChart,
    samples: &[ScalarSample],
    threshold: Option<f64>,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument(
            "no sample points for the rescaling check".into(),
        ));
    }
    let eps = threshold
        .unwrap_or_else(|| 0.3 * samples.iter().fold(0.0_f64, |m, s| m.max(s.value.abs())));
    let mut worst = 0.0_f64;
    for s in samples {
        if !(s.value > eps) {
            return Err(Error::RescalingDegenerate {
                point: s.x.clone(),
                value: s.value,
                threshold: eps,
            });
        }
        let base = chart.conformal_point(&s.x)?;
        let hat = rescaled_point(&base, s);
        let curv = CurvatureSummary::new(&hat.riemann(), hat.phi);
        worst = worst.max(covariant_norm(&curv.tracefree_ricci, hat.phi));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_points(n: usize, lo: f64, hi: f64, per_axis: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in &out {
                for i in 0..per_axis {
                    let t = lo + (hi - lo) * i as f64 / (per_axis - 1) as f64;
                    let mut q = p.clone();
                    q.push(t);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn constant_rescaling_of_flat_space() {
        let chart = MetricChart::flat(3);
        let f = Polynomial::constant(3, 1.0);
        let samples: Vec<_> = grid_points(3, -1.0, 1.0, 4)
            .iter()
            .map(|x| ScalarSample::from_polynomial(&f, x))
            .collect();
        assert_eq!(
            einstein_residual_of_rescaling(&chart, &samples, None).unwrap(),
            0.0
        );
    }

    #[test]
    fn sphere_from_flat() {
        let n = 3;
        let chart = MetricChart::flat(n);
        let f = Polynomial::constant(n, 1.0) + Polynomial::norm_squared(n);
        let samples: Vec<_> = grid_points(n, -1.0, 1.0, 5)
            .iter()
            .map(|x| ScalarSample::from_polynomial(&f, x))
            .collect();
        let r = einstein_residual_of_rescaling(&chart, &samples, Some(0.3)).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn half_space_from_flat() {
        let n = 3;
        let chart = MetricChart::flat(n);
        let f = Polynomial::variable(n, 0);
        let samples: Vec<_> = grid_points(n, 0.4, 1.5, 4)
            .iter()
            .map(|x| ScalarSample::from_polynomial(&f, x))
            .collect();
        let r = einstein_residual_of_rescaling(&chart, &samples, Some(0.3)).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn small_values_are_rejected() {
        let chart = MetricChart::flat(2);
        let f = Polynomial::variable(2, 0);
        let samples = vec![
            ScalarSample::from_polynomial(&f, &[1.0, 0.0]),
            ScalarSample::from_polynomial(&f, &[0.1, 0.0]),
        ];
        assert!(matches!(
            einstein_residual_of_rescaling(&chart, &samples, None),
            Err(Error::RescalingDegenerate { .. })
        ));
    }

    #[test]
    fn generic_rescaling_is_not_einstein() {
        let chart = MetricChart::flat(3);
        let f = Polynomial::constant(3, 2.0) + Polynomial::monomial(vec![2, 1, 0], 1.0);
        let s = ScalarSample::from_polynomial(&f, &[0.5, 0.5, 0.2]);
        assert!(einstein_residual_of_rescaling(&chart, &[s], None).unwrap() > 1e-3);
    }
}
