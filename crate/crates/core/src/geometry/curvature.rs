//! Christoffel symbols and curvature of `e^{2φ}δ` from the 2-jet of `φ`.
//!
//! Index conventions: `Γ^a_bc` is stored as `gamma[(a·n + b)·n + c]`, and
//! `R_ab^c_d` is defined by `(∇_a∇_b − ∇_b∇_a)V^c = R_ab^c_d V^d`, i.e.
//!
//! ```text
//! R_ab^c_d = ∂_aΓ^c_bd − ∂_bΓ^c_ad + Γ^c_ae Γ^e_bd − Γ^c_be Γ^e_ad.
//! ```
//!
//! With `Ric_ab = R_ca^c_b` the round sphere has positive scalar curvature.
//! On 1-forms the same tensor acts with a minus sign:
//! `(∇_a∇_b − ∇_b∇_a)ω_d = −R_ab^c_d ω_c`.

use nalgebra::{DMatrix, DVector};

/// Short description of the curvature convention, embedded in reports.
pub const CURVATURE_CONVENTION: &str = "R_ab^c_d V^d = (∇_a∇_b − ∇_b∇_a)V^c; \
    Ric_ab = R_ca^c_b; round sphere has Ric = (n−1)/ρ² g; \
    Einstein top row uses Q_a^d = g^bc R_ab^d_c";

/// `φ` with its gradient and Hessian at one point.
#[derive(Debug, Clone)]
pub struct ConformalPoint {
    pub n: usize,
    pub phi: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// `Γ^a_bc` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let n = self.n;
        self.data[(a * n + b) * n + c] = v;
    }
}

/// `∂_e Γ^a_bc`, stored as `data[((e·n + a)·n + b)·n + c]`.
#[derive(Debug, Clone)]
pub struct ChristoffelDerivative {
    pub n: usize,
    pub data: Vec<f64>,
}

impl ChristoffelDerivative {
    pub fn get(&self, e: usize, a: usize, b: usize, c: usize) -> f64 {
        let n = self.n;
        self.data[((e * n + a) * n + b) * n + c]
    }
}

/// `R_ab^c_d`, stored as `data[((a·n + b)·n + c)·n + d]`.
#[derive(Debug, Clone)]
pub struct Riemann {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Riemann {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    /// The matrix `(R_ab)^c_d` acting on vectors.
    pub fn endomorphism(&self, a: usize, b: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |c, d| self.get(a, b, c, d))
    }

    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, b| (0..n).map(|c| self.get(c, a, c, b)).sum())
    }

    /// `Q_a^d = g^{bc} R_ab^d_c` for a conformally flat metric with factor
    /// `e^{2φ}` (so `g^{bc} = e^{−2φ}δ^{bc}`).
    pub fn contracted(&self, phi: f64) -> DMatrix<f64> {
        let n = self.n;
        let ginv = (-2.0 * phi).exp();
        DMatrix::from_fn(n, n, |a, d| {
            ginv * (0..n).map(|b| self.get(a, b, d, b)).sum::<f64>()
        })
    }

    /// Largest violation of `R_ab = −R_ba`, the first Bianchi identity
    /// `R_ab^c_d + R_bd^c_a + R_da^c_b = 0`, and pair antisymmetry of the
    /// lowered tensor `R_abcd = g_ce R_ab^e_d` (conformally flat metric).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = self.get(a, b, c, d);
                        worst = worst.max((r + self.get(b, a, c, d)).abs());
                        worst = worst.max((r + self.get(b, d, c, a) + self.get(d, a, c, b)).abs());
                        // g is a multiple of δ, so lowering c keeps c ↔ d antisymmetry
                        worst = worst.max((r + self.get(a, b, d, c)).abs());
                    }
                }
            }
        }
        worst
    }
}

impl ConformalPoint {
    /// `Γ^a_bc = δ^a_b φ_c + δ^a_c φ_b − δ_bc φ_a`.
    pub fn christoffel(&self) -> Christoffel {
        let n = self.n;
        let mut g = Christoffel::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut v = 0.0;
                    if a == b {
                        v += self.grad[c];
                    }
                    if a == c {
                        v += self.grad[b];
                    }
                    if b == c {
                        v -= self.grad[a];
                    }
                    g.set(a, b, c, v);
                }
            }
        }
        g
    }

    pub fn christoffel_derivative(&self) -> ChristoffelDerivative {
        let n = self.n;
        let mut data = vec![0.0; n * n * n * n];
        for e in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut v = 0.0;
                        if a == b {
                            v += self.hess[(c, e)];
                        }
                        if a == c {
                            v += self.hess[(b, e)];
                        }
                        if b == c {
                            v -= self.hess[(a, e)];
                        }
                        data[((e * n + a) * n + b) * n + c] = v;
                    }
                }
            }
        }
        ChristoffelDerivative { n, data }
    }

    pub fn riemann(&self) -> Riemann {
        riemann_from(&self.christoffel(), &self.christoffel_derivative())
    }

    pub fn metric_factor(&self) -> f64 {
        (2.0 * self.phi).exp()
    }
}

/// Riemann tensor from Christoffel symbols and their first derivatives.
pub fn riemann_from(gamma: &Christoffel, dgamma: &ChristoffelDerivative) -> Riemann {
    let n = gamma.n;
    let mut data = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgamma.get(a, c, b, d) - dgamma.get(b, c, a, d);
                    for e in 0..n {
                        v += gamma.get(c, a, e) * gamma.get(e, b, d)
                            - gamma.get(c, b, e) * gamma.get(e, a, d);
                    }
                    data[((a * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    Riemann { n, data }
}

/// Curvature quantities at one point.
#[derive(Debug, Clone)]
pub struct CurvatureSummary {
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
    pub tracefree_ricci: DMatrix<f64>,
}

impl CurvatureSummary {
    pub fn new(riemann: &Riemann, phi: f64) -> Self {
        let ricci = riemann.ricci();
        let ginv = (-2.0 * phi).exp();
        let scalar = ginv * ricci.trace();
        let tracefree_ricci = tracefree(&ricci);
        CurvatureSummary {
            ricci,
            scalar,
            tracefree_ricci,
        }
    }
}

/// Tracefree part with respect to `e^{2φ}δ`; for a conformally flat metric
/// this is the Euclidean tracefree part.
pub fn tracefree(t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.nrows();
    t - DMatrix::identity(n, n) * (t.trace() / n as f64)
}

/// `|T|_g` for a covariant 2-tensor and `g = e^{2φ}δ`.
pub fn covariant_norm(t: &DMatrix<f64>, phi: f64) -> f64 {
    (-2.0 * phi).exp() * t.norm()
}
