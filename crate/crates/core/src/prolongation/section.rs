//! Sections of the bundle modelled on a graded module, expressed in the
//! orthonormal frame `e_i = e^{−φ}∂_i` of a conformally flat chart.
//!
//! In that frame the Levi-Civita connection acts on `W` through the rotation
//! generators: `∇_{∂_a}Σ = ∂_aΣ + ρ(ω(∂_a))Σ` with
//! `ω(∂_a) = Σ_{k<l} (φ_l δ_ka − φ_k δ_la) A_kl`. The algebraic part of the
//! modified connection is `∂Σ(e_a) = ρ(X_a)Σ`.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{AlgebraContext, GradedModule};
use crate::geometry::MetricChart;
use crate::stencil::partial_of;
use crate::{Error, Result};

/// A value of the bundle at one point, with its component split.
#[derive(Debug, Clone, PartialEq)]
pub struct TractorSection {
    pub value: DVector<f64>,
    /// Coordinate ranges of the components `W_0, …, W_N`.
    layout: Vec<Vec<usize>>,
}

impl TractorSection {
    pub fn new(module: &GradedModule, value: DVector<f64>) -> Result<Self> {
        if value.len() != module.dim {
            return Err(Error::InvalidArgument(format!(
                "section value has {} entries, module has dimension {}",
                value.len(),
                module.dim
            )));
        }
        Ok(TractorSection {
            value,
            layout: module
                .components
                .iter()
                .map(|c| c.indices.clone())
                .collect(),
        })
    }

    pub fn top(&self) -> usize {
        self.layout.len() - 1
    }

    /// `Σ_j`, the coordinates of the `j`-th component.
    pub fn component(&self, j: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.layout[j].len(),
            self.layout[j].iter().map(|&i| self.value[i]),
        )
    }

    /// `Σ₀`.
    pub fn bottom(&self) -> DVector<f64> {
        self.component(0)
    }

    pub fn components(&self) -> Vec<DVector<f64>> {
        (0..self.layout.len()).map(|j| self.component(j)).collect()
    }

    /// Euclidean norm of each component.
    pub fn component_norms(&self) -> Vec<f64> {
        self.components().iter().map(|c| c.norm()).collect()
    }

    /// Reassembles the value from its components.
    pub fn from_components(module: &GradedModule, parts: &[DVector<f64>]) -> Result<Self> {
        if parts.len() != module.components.len() {
            return Err(Error::InvalidArgument("wrong number of components".into()));
        }
        let mut v = DVector::zeros(module.dim);
        for (j, part) in parts.iter().enumerate() {
            if part.len() != module.components[j].indices.len() {
                return Err(Error::InvalidArgument(format!(
                    "component {j} has wrong size"
                )));
            }
            v += module.embed_component(part, j);
        }
        TractorSection::new(module, v)
    }
}

/// Sparse entries `(row, col, value)` of a matrix.
pub(crate) fn sparse(m: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != 0.0 {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// Rotation generators entering `ω(∂_a)`: triples `(l, sign, pair)` such
/// that `ω(∂_a) = Σ sign·φ_l·A_pair`.
pub(crate) fn rotation_terms(ctx: &AlgebraContext, a: usize) -> Vec<(usize, f64, usize)> {
    let n = ctx.n();
    let mut out = Vec::new();
    for l in 0..n {
        if l > a {
            out.push((l, 1.0, ctx.algebra.rotation_index(a, l).expect("pair")));
        } else if l < a {
            out.push((l, -1.0, ctx.algebra.rotation_index(l, a).expect("pair")));
        }
    }
    out
}

/// `ρ(ω(∂_a))` for the frame connection, given `∂φ` at a point.
pub fn frame_connection(ctx: &AlgebraContext, grad_phi: &DVector<f64>, a: usize) -> DMatrix<f64> {
    let dim = ctx.module.dim;
    let mut m = DMatrix::zeros(dim, dim);
    for (l, sign, idx) in rotation_terms(ctx, a) {
        let g = grad_phi[l];
        if g != 0.0 {
            m += &ctx.module.action[idx] * (sign * g);
        }
    }
    m
}

/// A section given by frame components near a point.
pub trait SectionField {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<DVector<f64>>;
    /// `∂_aΣ` at `x`, `a` a coordinate direction.
    fn partial(&self, x: &[f64], a: usize) -> Result<DVector<f64>>;
}

/// Section with closed-form value and partials.
pub struct ExactSection<V, D> {
    pub dim: usize,
    pub value: V,
    pub partial: D,
}

impl<V, D> SectionField for ExactSection<V, D>
where
    V: Fn(&[f64]) -> DVector<f64>,
    D: Fn(&[f64], usize) -> DVector<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok((self.value)(x))
    }

    fn partial(&self, x: &[f64], a: usize) -> Result<DVector<f64>> {
        Ok((self.partial)(x, a))
    }
}

/// Section known only through point values; partials by central stencils.
pub struct StencilSection<V> {
    pub dim: usize,
    pub value: V,
    pub step: f64,
}

impl<V> SectionField for StencilSection<V>
where
    V: Fn(&[f64]) -> DVector<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok((self.value)(x))
    }

    fn partial(&self, x: &[f64], a: usize) -> Result<DVector<f64>> {
        let mut alpha = vec![0; x.len()];
        alpha[a] = 1;
        let mut out = DVector::zeros(self.dim);
        for c in 0..self.dim {
            let f = |y: &[f64]| (self.value)(y)[c];
            out[c] = partial_of(&f, x, &alpha, self.step);
        }
        Ok(out)
    }
}

/// `∇̃_ξΣ = ∇_ξΣ + ∂(Σ)(ξ)` at `x` for a coordinate vector `ξ`, returned in
/// frame components.
pub fn modified_connection_apply(
    chart: &MetricChart,
    ctx: &AlgebraContext,
    field: &dyn SectionField,
    x: &[f64],
    xi: &[f64],
) -> Result<DVector<f64>> {
    let n = ctx.n();
    if chart.n != n || xi.len() != n || field.dim() != ctx.module.dim {
        return Err(Error::InvalidArgument(
            "chart, direction and section dimensions must match the module".into(),
        ));
    }
    let p = chart.conformal_point(x)?;
    let sigma = field.value(x)?;
    let dim = ctx.module.dim;
    let d0 = &ctx.complex.d[0];
    let scale = p.phi.exp();
    let mut out = DVector::zeros(dim);
    for (a, &c) in xi.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let nabla = field.partial(x, a)? + frame_connection(ctx, &p.grad, a) * &sigma;
        // ∂_a = e^φ e_a, and (∂Σ)(e_a) is the a-th block of the Λ¹ vector
        let block = d0.rows(a * dim, dim) * &sigma;
        out += (nabla + block * scale) * c;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ModuleFamily;

    fn standard(n: usize) -> AlgebraContext {
        AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap()
    }

    fn constant(v: DVector<f64>) -> impl SectionField {
        let dim = v.len();
        ExactSection {
            dim,
            value: move |_: &[f64]| v.clone(),
            partial: move |_: &[f64], _| DVector::zeros(dim),
        }
    }

    #[test]
    fn bottom_constant_is_parallel() {
        let ctx = standard(3);
        let chart = MetricChart::flat(3);
        let s = constant(DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 1.0]));
        let r = modified_connection_apply(&chart, &ctx, &s, &[0.2, 0.1, 0.0], &[1.0, -2.0, 0.5])
            .unwrap();
        assert_eq!(r.amax(), 0.0);
    }

    #[test]
    fn top_constant_gives_metric_in_middle() {
        let ctx = standard(3);
        let chart = MetricChart::flat(3);
        let s = constant(DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]));
        let xi = [0.3, -1.0, 2.0];
        let r = modified_connection_apply(&chart, &ctx, &s, &[0.0; 3], &xi).unwrap();
        assert_eq!(r[0], 0.0);
        assert_eq!(r[4], 0.0);
        for b in 0..3 {
            assert!((r[1 + b] - xi[b]).abs() < 1e-15);
        }
    }

    #[test]
    fn components_round_trip() {
        let ctx = AlgebraContext::new(2, ModuleFamily::Scalar { r: 3 }).unwrap();
        let v = DVector::from_fn(ctx.module.dim, |i, _| i as f64 + 0.5);
        let s = TractorSection::new(&ctx.module, v.clone()).unwrap();
        let back = TractorSection::from_components(&ctx.module, &s.components()).unwrap();
        assert_eq!(back.value, v);
        assert_eq!(s.bottom(), ctx.module.component(&v, 0));
    }

    #[test]
    fn frame_connection_is_skew() {
        let ctx = AlgebraContext::new(3, ModuleFamily::Adjoint).unwrap();
        let g = DVector::from_vec(vec![0.3, -0.2, 0.7]);
        for a in 0..3 {
            let m = frame_connection(&ctx, &g, a);
            assert!((&m + m.transpose()).amax() < 1e-14);
        }
    }
}
