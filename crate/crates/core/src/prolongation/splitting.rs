//! The splitting operator `L(f) = Σ_i (−1)^i (δ*∘∇)^i f`, evaluated on
//! Taylor jets so that every derivative is exact up to rounding.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::section::{rotation_terms, sparse, TractorSection};
use crate::algebra::AlgebraContext;
use crate::geometry::MetricChart;
use crate::indices::graded_exponents;
use crate::jet::{Jet, JetSpace};
use crate::linalg::{rank, FullSvd};
use crate::polynomial::Polynomial;
use crate::stencil::GridField;
use crate::{Error, Result};

/// A bottom-component field `f` that can be expanded into jets.
pub trait JetSource {
    /// Number of frame components (`dim W₀`).
    fn dim(&self) -> usize;
    fn jets(&self, space: &Arc<JetSpace>, x0: &[f64]) -> Result<Vec<Jet>>;
}

/// `f` with polynomial frame components.
#[derive(Debug, Clone)]
pub struct PolynomialSource {
    pub components: Vec<Polynomial>,
}

impl PolynomialSource {
    pub fn scalar(p: Polynomial) -> Self {
        PolynomialSource {
            components: vec![p],
        }
    }
}

impl JetSource for PolynomialSource {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn jets(&self, space: &Arc<JetSpace>, x0: &[f64]) -> Result<Vec<Jet>> {
        Ok(self
            .components
            .iter()
            .map(|p| Jet::from_polynomial(space, p, x0))
            .collect())
    }
}

/// `f = p/q` componentwise with a common polynomial denominator.
#[derive(Debug, Clone)]
pub struct RationalSource {
    pub numerators: Vec<Polynomial>,
    pub denominator: Polynomial,
}

impl RationalSource {
    /// `p/(ρ²+|x|²)`: on the stereographic sphere of radius `ρ` these are
    /// the conformal images of flat solutions.
    pub fn sphere_weighted(numerators: Vec<Polynomial>, radius: f64) -> Self {
        let n = numerators.first().map_or(0, |p| p.nvars());
        RationalSource {
            numerators,
            denominator: Polynomial::constant(n, radius * radius) + Polynomial::norm_squared(n),
        }
    }
}

impl JetSource for RationalSource {
    fn dim(&self) -> usize {
        self.numerators.len()
    }

    fn jets(&self, space: &Arc<JetSpace>, x0: &[f64]) -> Result<Vec<Jet>> {
        let q = self.denominator.eval(x0);
        if q.abs() < 1e-300 {
            return Err(Error::InvalidArgument(format!(
                "denominator vanishes at {x0:?}"
            )));
        }
        let inv = Jet::from_polynomial(space, &self.denominator, x0).recip();
        Ok(self
            .numerators
            .iter()
            .map(|p| &Jet::from_polynomial(space, p, x0) * &inv)
            .collect())
    }
}

/// Jets of grid samples at a node, with partials from central stencils.
pub struct GridSource<'a> {
    pub fields: &'a [GridField],
    pub node: usize,
}

impl JetSource for GridSource<'_> {
    fn dim(&self) -> usize {
        self.fields.len()
    }

    fn jets(&self, space: &Arc<JetSpace>, _x0: &[f64]) -> Result<Vec<Jet>> {
        self.fields
            .iter()
            .map(|g| {
                let mut err = None;
                let jet = Jet::from_partials(space, |e| {
                    let alpha: Vec<usize> = e.iter().map(|&k| k as usize).collect();
                    match g.partial(self.node, &alpha) {
                        Ok(v) => v,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    }
                });
                match err {
                    Some(e) => Err(e),
                    None => Ok(jet),
                }
            })
            .collect()
    }
}

/// Everything needed to differentiate frame components of sections as jets
/// around one point.
struct FrameJets {
    n: usize,
    /// `e^{−φ}`; `None` on the flat chart.
    scale: Option<Jet>,
    grad: Vec<Jet>,
    rotations: Vec<Vec<(usize, f64, Vec<(usize, usize, f64)>)>>,
    lowering: Vec<Vec<(usize, usize, f64)>>,
    delta_star: Vec<(usize, usize, f64)>,
}

impl FrameJets {
    fn new(
        ctx: &AlgebraContext,
        chart: &MetricChart,
        space: &Arc<JetSpace>,
        x0: &[f64],
    ) -> Result<Self> {
        let n = ctx.n();
        let (scale, grad) = if chart.is_flat() {
            (None, Vec::new())
        } else {
            let phi = chart.phi_jet(space, x0)?;
            let grad = (0..n).map(|a| phi.derivative(a)).collect();
            (Some(phi.scale(-1.0).exp()), grad)
        };
        let rotations = (0..n)
            .map(|a| {
                rotation_terms(ctx, a)
                    .into_iter()
                    .map(|(l, s, idx)| (l, s, sparse(&ctx.module.action[idx])))
                    .collect()
            })
            .collect();
        Ok(FrameJets {
            n,
            scale,
            grad,
            rotations,
            lowering: (0..n).map(|a| sparse(ctx.module.lowering(a))).collect(),
            delta_star: sparse(&ctx.complex.delta_star[1]),
        })
    }

    /// `∇_{e_a}Σ` for all `a`, as jets.
    fn covariant(&self, sigma: &[Jet]) -> Vec<Vec<Jet>> {
        let space = sigma[0].space().clone();
        let live: Vec<bool> = sigma.iter().map(|j| !j.is_zero()).collect();
        (0..self.n)
            .map(|a| {
                let mut out: Vec<Jet> = sigma.iter().map(|s| s.derivative(a)).collect();
                if let Some(scale) = &self.scale {
                    for (l, sign, entries) in &self.rotations[a] {
                        let mut acc = vec![Jet::zero(&space); sigma.len()];
                        for &(r, c, v) in entries {
                            if live[c] {
                                acc[r].add_scaled(&sigma[c], v);
                            }
                        }
                        for (o, t) in out.iter_mut().zip(&acc) {
                            if !t.is_zero() {
                                o.add_scaled(&(&self.grad[*l] * t), *sign);
                            }
                        }
                    }
                    for o in out.iter_mut() {
                        *o = &*o * scale;
                    }
                }
                out
            })
            .collect()
    }

    /// `−δ*(∇Σ)`, one step of the splitting recursion.
    fn step(&self, sigma: &[Jet]) -> Vec<Jet> {
        let dim = sigma.len();
        let nabla = self.covariant(sigma);
        let mut out = vec![Jet::zero(sigma[0].space()); dim];
        for &(r, c, v) in &self.delta_star {
            let (a, k) = (c / dim, c % dim);
            out[r].add_scaled(&nabla[a][k], -v);
        }
        out
    }
}

fn check_point(ctx: &AlgebraContext, chart: &MetricChart, x0: &[f64]) -> Result<()> {
    if chart.n != ctx.n() || x0.len() != ctx.n() {
        return Err(Error::InvalidArgument(
            "chart, point and module dimensions differ".into(),
        ));
    }
    chart.check_domain(x0)
}

/// Frame components of `L(f)` as jets at `x0`, from jets of `f`.
///
/// The jets must have order at least `N` for the value of `L(f)` to be
/// exact, and `N + 1` for its first derivatives.
pub fn splitting_jets(
    ctx: &AlgebraContext,
    chart: &MetricChart,
    x0: &[f64],
    bottom: &[Jet],
) -> Result<Vec<Jet>> {
    check_point(ctx, chart, x0)?;
    let module = &ctx.module;
    if bottom.len() != module.bottom_dim() {
        return Err(Error::InvalidArgument(format!(
            "f has {} components, W₀ has dimension {}",
            bottom.len(),
            module.bottom_dim()
        )));
    }
    let space = bottom[0].space().clone();
    if space.order() < module.top() {
        return Err(Error::InvalidArgument(format!(
            "L needs {} derivatives of f, jets carry {}",
            module.top(),
            space.order()
        )));
    }
    let frame = FrameJets::new(ctx, chart, &space, x0)?;
    let mut term = vec![Jet::zero(&space); module.dim];
    for (k, &i) in module.bottom().indices.iter().enumerate() {
        term[i] = bottom[k].clone();
    }
    let mut total = term.clone();
    for _ in 0..module.top() {
        term = frame.step(&term);
        for (t, s) in total.iter_mut().zip(&term) {
            t.add_scaled(s, 1.0);
        }
    }
    Ok(total)
}

/// `L(f)(x0)`.
pub fn splitting_operator(
    ctx: &AlgebraContext,
    chart: &MetricChart,
    source: &dyn JetSource,
    x0: &[f64],
) -> Result<TractorSection> {
    let space = JetSpace::new(ctx.n(), ctx.module.top());
    let jets = splitting_jets(ctx, chart, x0, &source.jets(&space, x0)?)?;
    TractorSection::new(
        &ctx.module,
        DVector::from_iterator(jets.len(), jets.iter().map(Jet::value)),
    )
}

/// `L(f)(x0)` together with `δ*(∇̃L(f))(x0)`.
pub struct SplittingCheck {
    pub section: TractorSection,
    pub defect: DVector<f64>,
}

impl SplittingCheck {
    pub fn defect_norm(&self) -> f64 {
        self.defect.amax()
    }
}

pub fn splitting_with_defect(
    ctx: &AlgebraContext,
    chart: &MetricChart,
    source: &dyn JetSource,
    x0: &[f64],
) -> Result<SplittingCheck> {
    let module = &ctx.module;
    let n = ctx.n();
    let space = JetSpace::new(n, module.top() + 1);
    let jets = splitting_jets(ctx, chart, x0, &source.jets(&space, x0)?)?;
    let frame = FrameJets::new(ctx, chart, &space, x0)?;
    let nabla = frame.covariant(&jets);
    let value = DVector::from_iterator(jets.len(), jets.iter().map(Jet::value));
    let dim = module.dim;
    let mut tilde = DVector::zeros(n * dim);
    for a in 0..n {
        for (c, j) in nabla[a].iter().enumerate() {
            tilde[a * dim + c] = j.value();
        }
        for &(r, c, v) in &frame.lowering[a] {
            tilde[a * dim + r] += v * value[c];
        }
    }
    let defect = &ctx.complex.delta_star[1] * tilde;
    Ok(SplittingCheck {
        section: TractorSection::new(module, value)?,
        defect,
    })
}

/// Whether `L(f)_ℓ(x0)` is unchanged by a perturbation vanishing to order
/// `ℓ+1` at `x0`, up to `1e−10`.
pub fn jet_dependence_check(
    ctx: &AlgebraContext,
    chart: &MetricChart,
    f: &dyn JetSource,
    perturbation: &dyn JetSource,
    level: usize,
    x0: &[f64],
) -> Result<bool> {
    if level > ctx.module.top() {
        return Err(Error::InvalidArgument(format!(
            "component {level} does not exist, N = {}",
            ctx.module.top()
        )));
    }
    let space = JetSpace::new(ctx.n(), ctx.module.top());
    let base = f.jets(&space, x0)?;
    let shifted: Vec<Jet> = base
        .iter()
        .zip(perturbation.jets(&space, x0)?)
        .map(|(a, b)| a + &b)
        .collect();
    let lf = splitting_jets(ctx, chart, x0, &base)?;
    let lg = splitting_jets(ctx, chart, x0, &shifted)?;
    let idx = &ctx.module.components[level].indices;
    Ok(idx
        .iter()
        .all(|&i| (lf[i].value() - lg[i].value()).abs() <= 1e-10))
}

/// Rank of `J^ℓ W₀ → W₀ ⊕ … ⊕ W_ℓ`, `j^ℓ f ↦ (L(f)_0, …, L(f)_ℓ)(x0)`.
#[derive(Debug, Clone)]
pub struct JetIsomorphism {
    pub level: usize,
    pub jet_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
}

impl JetIsomorphism {
    pub fn is_isomorphism(&self) -> bool {
        self.jet_dim == self.target_dim && self.rank == self.jet_dim
    }
}

pub fn jet_isomorphism_check(
    ctx: &AlgebraContext,
    chart: &MetricChart,
    level: usize,
    x0: &[f64],
) -> Result<JetIsomorphism> {
    let module = &ctx.module;
    if level > module.top() {
        return Err(Error::InvalidArgument(format!("level {level} exceeds N")));
    }
    let n = ctx.n();
    let space = JetSpace::new(n, module.top());
    let exps = graded_exponents(n, level);
    let d0 = module.bottom_dim();
    let rows: Vec<usize> = (0..=level)
        .flat_map(|j| module.components[j].indices.clone())
        .collect();
    let mut m = DMatrix::zeros(rows.len(), d0 * exps.len());
    let mut col = 0;
    for w in 0..d0 {
        for e in &exps {
            let mut bottom = vec![Jet::zero(&space); d0];
            bottom[w] = Jet::from_partials(&space, |alpha| {
                if alpha == e.as_slice() {
                    alpha
                        .iter()
                        .map(|&p| (1..=p).map(f64::from).product::<f64>())
                        .product()
                } else {
                    0.0
                }
            });
            let l = splitting_jets(ctx, chart, x0, &bottom)?;
            for (r, &i) in rows.iter().enumerate() {
                m[(r, col)] = l[i].value();
            }
            col += 1;
        }
    }
    Ok(JetIsomorphism {
        level,
        jet_dim: m.ncols(),
        target_dim: m.nrows(),
        rank: rank(&m),
    })
}

/// Flat-model uniqueness of the splitting: the map
/// `Σ ↦ (Σ₀(x_s), δ*∇̃Σ(x_s))` on sections with polynomial components of
/// degree `≤ N` has trivial kernel.
#[derive(Debug, Clone)]
pub struct UniquenessCheck {
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub smallest_singular_value: f64,
}

impl UniquenessCheck {
    pub fn injective(&self) -> bool {
        self.rank == self.unknowns
    }
}

pub fn splitting_uniqueness_check(ctx: &AlgebraContext, seed: u64) -> Result<UniquenessCheck> {
    let module = &ctx.module;
    let n = ctx.n();
    let dim = module.dim;
    let exps = graded_exponents(n, module.top());
    let bottom = &module.bottom().indices;
    let unknowns = dim * exps.len();
    let per_point = bottom.len() + dim;
    let points = (3 * unknowns).div_ceil(per_point) + 5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Vec<f64>> = (0..points)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let lowering: Vec<&DMatrix<f64>> = (0..n).map(|a| module.lowering(a)).collect();
    let dstar = &ctx.complex.delta_star[1];
    let mut m = DMatrix::zeros(points * per_point, unknowns);
    for (s, x) in samples.iter().enumerate() {
        let row0 = s * per_point;
        for (k, e) in exps.iter().enumerate() {
            let mono = Polynomial::monomial(e.clone(), 1.0);
            let v = mono.eval(x);
            let grad = mono.gradient(x);
            for c in 0..dim {
                let col = c * exps.len() + k;
                if let Some(pos) = bottom.iter().position(|&b| b == c) {
                    m[(row0 + pos, col)] = v;
                }
                // ∇̃(e_c·x^e)(e_a) = ∂_a x^e e_c + x^e ρ(X_a)e_c
                let mut tilde = DVector::zeros(n * dim);
                for a in 0..n {
                    tilde[a * dim + c] += grad[a];
                    for r in 0..dim {
                        tilde[a * dim + r] += v * lowering[a][(r, c)];
                    }
                }
                let img = dstar * tilde;
                for r in 0..dim {
                    m[(row0 + bottom.len() + r, col)] = img[r];
                }
            }
        }
    }
    let svd = FullSvd::new(&m);
    Ok(UniquenessCheck {
        unknowns,
        equations: m.nrows(),
        rank: rank(&m),
        smallest_singular_value: svd.singular_values.last().copied().unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ModuleFamily;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::variable(n, i)
    }

    #[test]
    fn standard_splitting_of_product() {
        let ctx = AlgebraContext::new(2, ModuleFamily::Scalar { r: 2 }).unwrap();
        let chart = MetricChart::flat(2);
        let f = PolynomialSource::scalar(&x(2, 0) * &x(2, 1));
        let p = [0.3, -0.7];
        let l = splitting_operator(&ctx, &chart, &f, &p).unwrap();
        let expect = [0.0, -0.7, 0.3, 0.3 * -0.7];
        for (a, b) in l.value.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{l:?}");
        }
    }

    #[test]
    fn standard_splitting_of_norm_squared() {
        let n = 3;
        let ctx = AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap();
        let chart = MetricChart::flat(n);
        let f = PolynomialSource::scalar(Polynomial::norm_squared(n));
        let p = [0.5, 0.25, -1.0];
        let l = splitting_operator(&ctx, &chart, &f, &p).unwrap();
        assert!((l.value[0] + 2.0).abs() < 1e-14);
        for a in 0..n {
            assert!((l.value[1 + a] - 2.0 * p[a]).abs() < 1e-14);
        }
        assert!((l.value[4] - 1.3125).abs() < 1e-14);
    }

    #[test]
    fn constant_has_only_bottom_component() {
        let ctx = AlgebraContext::new(2, ModuleFamily::Scalar { r: 3 }).unwrap();
        let chart = MetricChart::flat(2);
        let f = PolynomialSource::scalar(Polynomial::constant(2, 2.5));
        let l = splitting_operator(&ctx, &chart, &f, &[0.1, 0.2]).unwrap();
        let norms = l.component_norms();
        assert_eq!(norms.len(), 5);
        assert!((norms[0] - 2.5).abs() < 1e-15);
        assert!(norms[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sphere_defect_vanishes() {
        let n = 3;
        let ctx = AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap();
        let chart = MetricChart::sphere(n, 1.0).unwrap();
        let p = Polynomial::from_terms(n, [(vec![2, 1, 0], 0.7), (vec![0, 0, 1], -1.1)]);
        let chk = splitting_with_defect(
            &ctx,
            &chart,
            &PolynomialSource::scalar(p),
            &[0.3, -0.4, 0.2],
        )
        .unwrap();
        assert!(chk.defect_norm() < 1e-12, "{}", chk.defect_norm());
    }

    #[test]
    fn jet_dependence_of_standard_rep() {
        let n = 2;
        let ctx = AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap();
        let chart = MetricChart::flat(n);
        let x0 = [0.4, -0.3];
        let f = PolynomialSource::scalar(&x(n, 0) * &x(n, 1));
        let shift = |p: &Polynomial| p.translate(&x0);
        let sq = Polynomial::norm_squared(n);
        let cubic = PolynomialSource::scalar(shift(&(&sq * &x(n, 0))));
        let quad = PolynomialSource::scalar(shift(&(&x(n, 0) * &x(n, 0))));
        assert!(jet_dependence_check(&ctx, &chart, &f, &cubic, 1, &x0).unwrap());
        assert!(!jet_dependence_check(&ctx, &chart, &f, &quad, 2, &x0).unwrap());
        assert!(jet_dependence_check(&ctx, &chart, &f, &quad, 0, &x0).unwrap());
    }
}
