//! The maps `φ_i : W_i → ⊗ⁱg₁ ⊗ W₀` and the Cartan product projection.
//!
//! Tensor coordinates of `⊗ⁱg₁ ⊗ W₀` are `flat(a_1..a_i) · dim W₀ + w`, with
//! the first slot most significant.

use nalgebra::DMatrix;

use super::hodge::KostantComplex;
use super::module::{GradedModule, ModuleFamily};
use crate::indices::{euclidean_trace, flatten_tensor_index, symmetrizer, tensor_indices};
use crate::linalg::{
    column_space, hstack, intersection, null_space, pseudo_inverse, rank, residual_from_span,
};
use crate::{Error, Result};

const IDENTITY_TOL: f64 = 1e-10;

/// `φ_i(w)_{a_1…a_i} = X_{a_i}⋯X_{a_1}·w`, as a matrix from the coordinates
/// of `W_i` to those of `⊗ⁱg₁ ⊗ W₀`.
pub fn phi_map(module: &GradedModule, i: usize) -> Result<DMatrix<f64>> {
    if i > module.top() {
        return Err(Error::InvalidArgument(format!(
            "φ_i exists for 0 ≤ i ≤ {}, got {i}",
            module.top()
        )));
    }
    let n = module.n;
    let src = &module.components[i].indices;
    let bottom = &module.components[0].indices;
    let d0 = bottom.len();
    let mut out = DMatrix::zeros(n.pow(i as u32) * d0, src.len());
    for idx in tensor_indices(n, i) {
        let mut chain = module.component_basis(i);
        for &a in &idx {
            chain = module.lowering(a) * chain;
        }
        let row0 = flatten_tensor_index(n, &idx) * d0;
        for (w, &coord) in bottom.iter().enumerate() {
            for c in 0..src.len() {
                out[(row0 + w, c)] = chain[(coord, c)];
            }
        }
    }
    Ok(out)
}

/// The Cartan product `Sʳg₁ ⊗ W₀ → H₁`, realised as an idempotent on
/// `⊗ʳg₁ ⊗ W₀` whose image is the copy of `H₁` and whose kernel on the
/// symmetric tensors is `K`.
#[derive(Debug, Clone)]
pub struct CartanProduct {
    pub r: usize,
    pub projection: DMatrix<f64>,
    /// Orthonormal basis of `K ⊂ Sʳg₁ ⊗ W₀`.
    pub kernel: DMatrix<f64>,
    pub rank: usize,
}

/// Orthonormal basis of `Sⁱg₁ ⊗ W₀` inside `⊗ⁱg₁ ⊗ W₀`.
pub fn symmetric_subspace(n: usize, i: usize, d0: usize) -> DMatrix<f64> {
    let sym = symmetrizer(n, i).kronecker(&DMatrix::identity(d0, d0));
    column_space(&sym)
}

pub fn cartan_product_projection(
    module: &GradedModule,
    complex: &KostantComplex,
) -> Result<CartanProduct> {
    let n = module.n;
    let d0 = module.bottom_dim();
    match module.family {
        ModuleFamily::Scalar { r } => {
            let sym = symmetric_subspace(n, r, d0);
            // tracefree symmetric tensors, Euclidean form on g₁
            let tracefree = if r >= 2 {
                let tr = euclidean_trace(n, r).kronecker(&DMatrix::identity(d0, d0));
                let ker = null_space(&(tr * &sym));
                column_space(&(&sym * ker))
            } else {
                sym.clone()
            };
            let projection = &tracefree * tracefree.transpose();
            let complement = &sym - &projection * &sym;
            let kernel = column_space(&complement);
            Ok(CartanProduct {
                r,
                rank: tracefree.ncols(),
                projection,
                kernel,
            })
        }
        ModuleFamily::Adjoint => {
            // H₁ ⊂ g₁⊗W₀ and g₁⊗W₀ = im ∂ ⊕ H₁; project along im ∂.
            let bottom = &module.components[0].indices;
            let dw = module.dim;
            let restrict = |m: &DMatrix<f64>| -> DMatrix<f64> {
                let mut out = DMatrix::zeros(n * d0, m.ncols());
                for a in 0..n {
                    for (w, &coord) in bottom.iter().enumerate() {
                        out.set_row(a * d0 + w, &m.row(a * dw + coord));
                    }
                }
                out
            };
            let h1 = restrict(&complex.hodge[1].harmonic_of_homogeneity(1));
            let image = phi_map(module, 1)?;
            let frame = hstack(&[&h1, &image]);
            let inv = crate::linalg::invert(&frame, "g₁⊗W₀ = H₁ ⊕ im ∂")?;
            let keep = hstack(&[&h1, &DMatrix::zeros(n * d0, image.ncols())]);
            let projection = keep * inv;
            Ok(CartanProduct {
                r: 1,
                rank: h1.ncols(),
                projection,
                kernel: column_space(&image),
            })
        }
    }
}

/// Result of checking one `φ_i` against its predicted image.
#[derive(Debug, Clone)]
pub struct PhiCheck {
    pub i: usize,
    pub rank: usize,
    pub source_dim: usize,
    pub predicted_image_dim: usize,
    /// Distance of `im φ_i` from the predicted subspace.
    pub image_defect: f64,
    /// For `i < r`: `‖δ*∘(id⊗φ_{i−1}⁻¹)∘φ_i − id‖` and the same map compared
    /// with `φ_i⁻¹` on `Sⁱg₁⊗W₀`.
    pub inverse_defect: Option<f64>,
}

impl PhiCheck {
    pub fn passes(&self) -> bool {
        self.rank == self.source_dim
            && self.rank == self.predicted_image_dim
            && self.image_defect < IDENTITY_TOL
            && self.inverse_defect.map_or(true, |d| d < IDENTITY_TOL)
    }
}

/// Predicted image: `Sⁱ⊗W₀` for `i < r`, `(Sⁱ⊗W₀) ∩ (⊗^{i−r} ⊗ K)` otherwise.
pub fn predicted_phi_image(
    module: &GradedModule,
    cartan: &CartanProduct,
    i: usize,
) -> DMatrix<f64> {
    let n = module.n;
    let d0 = module.bottom_dim();
    let r = module.family.r();
    let sym = symmetric_subspace(n, i, d0);
    if i < r {
        return sym;
    }
    let head = n.pow((i - r) as u32);
    let k = DMatrix::<f64>::identity(head, head).kronecker(&cartan.kernel);
    intersection(&sym, &k)
}

pub fn check_phi(
    module: &GradedModule,
    complex: &KostantComplex,
    cartan: &CartanProduct,
    i: usize,
) -> Result<PhiCheck> {
    let phi = phi_map(module, i)?;
    let predicted = predicted_phi_image(module, cartan, i);
    let image = column_space(&phi);
    let image_defect =
        residual_from_span(&predicted, &image).max(residual_from_span(&image, &predicted));
    let r = module.family.r();
    let inverse_defect = if i >= 1 && i < r {
        Some(prop_inverse_defect(module, complex, &phi, i)?)
    } else {
        None
    };
    Ok(PhiCheck {
        i,
        rank: rank(&phi),
        source_dim: module.components[i].indices.len(),
        predicted_image_dim: predicted.ncols(),
        image_defect,
        inverse_defect,
    })
}

/// `δ* ∘ (id ⊗ φ_{i−1}⁻¹)` restricted to `Sⁱg₁⊗W₀` versus `φ_i⁻¹`.
fn prop_inverse_defect(
    module: &GradedModule,
    complex: &KostantComplex,
    phi: &DMatrix<f64>,
    i: usize,
) -> Result<f64> {
    let n = module.n;
    let d0 = module.bottom_dim();
    let dw = module.dim;
    let prev = pseudo_inverse(&phi_map(module, i - 1)?);
    let prev_idx = &module.components[i - 1].indices;
    let tail = n.pow((i - 1) as u32) * d0;
    // id ⊗ φ_{i−1}⁻¹ : g₁ ⊗ (⊗^{i−1}⊗W₀) → g₁ ⊗ W (degree-1 form coordinates)
    let mut lift = DMatrix::zeros(n * dw, n * tail);
    for a in 0..n {
        for (local, &coord) in prev_idx.iter().enumerate() {
            for t in 0..tail {
                lift[(a * dw + coord, a * tail + t)] = prev[(local, t)];
            }
        }
    }
    let target = &module.components[i].indices;
    let composite = (&complex.delta_star[1] * lift).select_rows(target);
    let identity_defect = (&composite * phi - DMatrix::identity(phi.ncols(), phi.ncols())).amax();
    let sym = symmetric_subspace(n, i, d0);
    let versus_inverse = (&composite * &sym - pseudo_inverse(phi) * &sym).amax();
    Ok(identity_defect.max(versus_inverse))
}
