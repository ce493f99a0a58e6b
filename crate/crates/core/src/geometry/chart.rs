//! Conformally flat metrics `g = e^{2φ}δ` on a single chart.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::curvature::{
    riemann_from, Christoffel, ChristoffelDerivative, ConformalPoint, CurvatureSummary, Riemann,
};
use crate::jet::{Jet, JetSpace};
use crate::polynomial::Polynomial;
use crate::stencil::central_weights;
use crate::{Error, Result};

/// Catalog of analytic conformal factors.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricFamily {
    Flat,
    /// `φ` a polynomial in the chart coordinates.
    ConformalPoly(Polynomial),
    /// Stereographic round sphere of radius `ρ`, `φ = log(2ρ²/(ρ²+|x|²))`.
    Sphere {
        radius: f64,
    },
    /// Poincaré ball of radius `ρ`, `φ = log(2ρ²/(ρ²−|x|²))`.
    Hyperbolic {
        radius: f64,
    },
}

/// Which closed form was used for a chart; recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Flat,
    ConformalPoly,
    Sphere,
    Hyperbolic,
}

#[derive(Debug, Clone)]
pub struct MetricChart {
    pub n: usize,
    pub family: MetricFamily,
    /// Points with `|x| ≤ domain_radius` are admissible.
    pub domain_radius: f64,
}

impl MetricChart {
    pub fn flat(n: usize) -> Self {
        MetricChart {
            n,
            family: MetricFamily::Flat,
            domain_radius: f64::INFINITY,
        }
    }

    pub fn conformal_poly(phi: Polynomial, domain_radius: f64) -> Result<Self> {
        if !(domain_radius > 0.0) {
            return Err(Error::InvalidArgument(
                "domain radius must be positive".into(),
            ));
        }
        Ok(MetricChart {
            n: phi.nvars(),
            family: MetricFamily::ConformalPoly(phi),
            domain_radius,
        })
    }

    /// Round sphere; the chart covers `|x| ≤ 3ρ`.
    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(
                "sphere radius must be positive".into(),
            ));
        }
        Ok(MetricChart {
            n,
            family: MetricFamily::Sphere { radius },
            domain_radius: 3.0 * radius,
        })
    }

    /// Hyperbolic ball; the chart covers `|x| ≤ 0.9ρ`.
    pub fn hyperbolic(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(
                "hyperbolic radius must be positive".into(),
            ));
        }
        Ok(MetricChart {
            n,
            family: MetricFamily::Hyperbolic { radius },
            domain_radius: 0.9 * radius,
        })
    }

    /// Shrink the admissible domain (never enlarges the family default).
    pub fn with_domain(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(
                "domain radius must be positive".into(),
            ));
        }
        self.domain_radius = self.domain_radius.min(radius);
        Ok(self)
    }

    pub fn tag(&self) -> FamilyTag {
        match self.family {
            MetricFamily::Flat => FamilyTag::Flat,
            MetricFamily::ConformalPoly(_) => FamilyTag::ConformalPoly,
            MetricFamily::Sphere { .. } => FamilyTag::Sphere,
            MetricFamily::Hyperbolic { .. } => FamilyTag::Hyperbolic,
        }
    }

    pub fn is_flat(&self) -> bool {
        match &self.family {
            MetricFamily::Flat => true,
            MetricFamily::ConformalPoly(p) => p.degree() == 0,
            _ => false,
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, chart dimension is {}",
                x.len(),
                self.n
            )));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r <= self.domain_radius) {
            return Err(Error::OutsideDomain {
                point: x.to_vec(),
                radius: self.domain_radius,
            });
        }
        Ok(())
    }

    /// `φ`, `∂φ` and `∂²φ` at `x` in closed form.
    pub fn conformal_point(&self, x: &[f64]) -> Result<ConformalPoint> {
        self.check_domain(x)?;
        let n = self.n;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let xv = DVector::from_column_slice(x);
        let (phi, grad, hess) = match &self.family {
            MetricFamily::Flat => (0.0, DVector::zeros(n), DMatrix::zeros(n, n)),
            MetricFamily::ConformalPoly(p) => (p.eval(x), p.gradient(x), p.hessian(x)),
            MetricFamily::Sphere { radius } => {
                let rho2 = radius * radius;
                let s = rho2 + r2;
                let phi = (2.0 * rho2 / s).ln();
                let grad = &xv * (-2.0 / s);
                let hess =
                    DMatrix::identity(n, n) * (-2.0 / s) + &xv * xv.transpose() * (4.0 / (s * s));
                (phi, grad, hess)
            }
            MetricFamily::Hyperbolic { radius } => {
                let rho2 = radius * radius;
                let s = rho2 - r2;
                let phi = (2.0 * rho2 / s).ln();
                let grad = &xv * (2.0 / s);
                let hess =
                    DMatrix::identity(n, n) * (2.0 / s) + &xv * xv.transpose() * (4.0 / (s * s));
                (phi, grad, hess)
            }
        };
        Ok(ConformalPoint { n, phi, grad, hess })
    }

    /// Taylor jet of `φ` at `x0`.
    pub fn phi_jet(&self, space: &Arc<JetSpace>, x0: &[f64]) -> Result<Jet> {
        self.check_domain(x0)?;
        let r2 = || {
            (0..self.n).fold(Jet::zero(space), |acc, i| {
                let v = Jet::variable(space, i, x0[i]);
                &acc + &(&v * &v)
            })
        };
        Ok(match &self.family {
            MetricFamily::Flat => Jet::zero(space),
            MetricFamily::ConformalPoly(p) => Jet::from_polynomial(space, p, x0),
            MetricFamily::Sphere { radius } => {
                let rho2 = radius * radius;
                let s = &Jet::constant(space, rho2) + &r2();
                &Jet::constant(space, (2.0 * rho2).ln()) - &s.ln()
            }
            MetricFamily::Hyperbolic { radius } => {
                let rho2 = radius * radius;
                let s = &Jet::constant(space, rho2) - &r2();
                &Jet::constant(space, (2.0 * rho2).ln()) - &s.ln()
            }
        })
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.conformal_point(x)?;
        Ok(DMatrix::identity(self.n, self.n) * (2.0 * p.phi).exp())
    }

    pub fn inverse_metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.conformal_point(x)?;
        Ok(DMatrix::identity(self.n, self.n) * (-2.0 * p.phi).exp())
    }

    /// `∂_c g_ab`, stored with the derivative index first.
    pub fn metric_derivative(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.conformal_point(x)?;
        let n = self.n;
        let e = (2.0 * p.phi).exp();
        let mut out = vec![0.0; n * n * n];
        for c in 0..n {
            for a in 0..n {
                out[(c * n + a) * n + a] = 2.0 * p.grad[c] * e;
            }
        }
        Ok(out)
    }
}

impl MetricChart {
    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        Ok(self.conformal_point(x)?.christoffel())
    }

    pub fn riemann(&self, x: &[f64]) -> Result<Riemann> {
        Ok(self.conformal_point(x)?.riemann())
    }

    pub fn curvature(&self, x: &[f64]) -> Result<CurvatureSummary> {
        let p = self.conformal_point(x)?;
        Ok(CurvatureSummary::new(&p.riemann(), p.phi))
    }

    pub fn ricci(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.curvature(x)?.ricci)
    }

    pub fn scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        Ok(self.curvature(x)?.scalar)
    }

    pub fn tracefree_ricci(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.curvature(x)?.tracefree_ricci)
    }

    /// Riemann tensor with `∂Γ` taken by the fourth-order central stencil
    /// of step `h` applied to the exact Christoffel symbols.
    pub fn riemann_fd(&self, x: &[f64], h: f64) -> Result<Riemann> {
        let n = self.n;
        let gamma = self.christoffel(x)?;
        let mut data = vec![0.0; n * n * n * n];
        let mut y = x.to_vec();
        for e in 0..n {
            for &(offset, w) in central_weights(1) {
                y[e] = x[e] + offset as f64 * h;
                let g = self.christoffel(&y)?;
                for (k, v) in g.data.iter().enumerate() {
                    data[e * n * n * n + k] += w * v / h;
                }
            }
            y[e] = x[e];
        }
        Ok(riemann_from(&gamma, &ChristoffelDerivative { n, data }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains() {
        let h = MetricChart::hyperbolic(3, 1.0).unwrap();
        assert!(h.check_domain(&[0.5, 0.5, 0.0]).is_ok());
        assert!(matches!(
            h.check_domain(&[0.95, 0.0, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
        let s = MetricChart::sphere(2, 1.0).unwrap();
        assert!(s.check_domain(&[2.9, 0.0]).is_ok());
        assert!(s.check_domain(&[3.1, 0.0]).is_err());
        assert!(s.check_domain(&[0.0]).is_err());
    }

    #[test]
    fn metric_is_positive_definite() {
        let s = MetricChart::sphere(3, 2.0).unwrap();
        let g = s.metric(&[0.3, -1.0, 2.0]).unwrap();
        assert!(g.symmetric_eigenvalues().iter().all(|&l| l > 0.0));
    }

    #[test]
    fn sphere_phi_jet_matches_closed_form() {
        let chart = MetricChart::sphere(2, 1.5).unwrap();
        let x0 = [0.4, -0.2];
        let space = JetSpace::new(2, 3);
        let jet = chart.phi_jet(&space, &x0).unwrap();
        let p = chart.conformal_point(&x0).unwrap();
        assert!((jet.value() - p.phi).abs() < 1e-14);
        assert!((jet.partial_value(&[1, 0]) - p.grad[0]).abs() < 1e-14);
        assert!((jet.partial_value(&[1, 1]) - p.hess[(0, 1)]).abs() < 1e-14);
        assert!((jet.partial_value(&[0, 2]) - p.hess[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn sphere_curvature() {
        let chart = MetricChart::sphere(3, 1.0).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.3, -1.2, 2.0], [1.5, 0.5, -0.4]] {
            let c = chart.curvature(&x).unwrap();
            assert!((c.scalar - 6.0).abs() < 1e-10);
            assert!(c.tracefree_ricci.amax() < 1e-10);
        }
        let g = chart.christoffel(&[0.0, 0.0, 0.0]).unwrap();
        assert!(g.data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hyperbolic_curvature_is_negative() {
        let chart = MetricChart::hyperbolic(3, 2.0).unwrap();
        let c = chart.curvature(&[0.5, 0.2, -0.3]).unwrap();
        assert!((c.scalar + 6.0 / 4.0).abs() < 1e-10);
        assert!(c.tracefree_ricci.amax() < 1e-10);
    }

    #[test]
    fn stencil_curvature_converges() {
        // φ must not be a low-degree polynomial, or the stencil is exact
        let chart = MetricChart::hyperbolic(3, 1.0).unwrap();
        let x = [0.3, -0.2, 0.5];
        let exact = chart.riemann(&x).unwrap();
        let gap = |h: f64| {
            let fd = chart.riemann_fd(&x, h).unwrap();
            exact
                .data
                .iter()
                .zip(&fd.data)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        };
        let ratio = gap(0.02) / gap(0.01);
        assert!(ratio >= 8.0, "{ratio}");
    }
}
