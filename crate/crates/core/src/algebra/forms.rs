//! `W`-valued alternating forms `Λᵏg₁ ⊗ W` and the Kostant differentials.
//!
//! Coordinates of `Λᵏg₁ ⊗ W` are indexed by `subset · dim W + c`, where
//! `subset` runs over the lexicographic `k`-subsets of `0..n` and `c` over
//! module coordinates. The homogeneity of such a basis element is
//! `k + level(c)`, with `level` the component number of `c`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::module::GradedModule;
use crate::indices::ExteriorBasis;
use crate::{Error, Result};

/// Highest form degree for which `∂` is built.
pub const MAX_DIFFERENTIAL_DEGREE: usize = 2;
/// Highest form degree for which `∂*` is built (one more than `∂`, so the
/// Hodge decomposition is available in degree 2).
pub const MAX_CODIFFERENTIAL_DEGREE: usize = 3;

/// Index layout of `Λᵏg₁ ⊗ W`.
#[derive(Debug, Clone)]
pub struct FormSpace {
    pub k: usize,
    pub dim_w: usize,
    pub exterior: ExteriorBasis,
    homogeneity: Vec<usize>,
}

impl FormSpace {
    pub fn new(module: &GradedModule, k: usize) -> Self {
        let exterior = ExteriorBasis::new(module.n, k);
        let dim_w = module.dim;
        let homogeneity = (0..exterior.len() * dim_w)
            .map(|i| k + module.level_of(i % dim_w))
            .collect();
        FormSpace {
            k,
            dim_w,
            exterior,
            homogeneity,
        }
    }

    pub fn dim(&self) -> usize {
        self.exterior.len() * self.dim_w
    }

    pub fn index(&self, subset: usize, coord: usize) -> usize {
        subset * self.dim_w + coord
    }

    pub fn homogeneity_of(&self, i: usize) -> usize {
        self.homogeneity[i]
    }

    /// Coordinates grouped by homogeneity, ascending.
    pub fn homogeneity_blocks(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &h) in self.homogeneity.iter().enumerate() {
            blocks.entry(h).or_default().push(i);
        }
        blocks
    }
}

/// An element of `Λᵏg₁ ⊗ W`.
#[derive(Debug, Clone)]
pub struct FormBlock {
    pub k: usize,
    pub coords: DVector<f64>,
    homogeneity: Vec<usize>,
}

impl FormBlock {
    pub fn new(module: &GradedModule, k: usize, coords: DVector<f64>) -> Result<Self> {
        let space = FormSpace::new(module, k);
        if coords.len() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "degree-{k} form needs {} coordinates, got {}",
                space.dim(),
                coords.len()
            )));
        }
        Ok(FormBlock {
            k,
            coords,
            homogeneity: space.homogeneity,
        })
    }

    /// Split into homogeneous parts keyed by homogeneity.
    pub fn homogeneous_parts(&self) -> BTreeMap<usize, DVector<f64>> {
        let mut parts: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
        for (i, &h) in self.homogeneity.iter().enumerate() {
            parts
                .entry(h)
                .or_insert_with(|| DVector::zeros(self.coords.len()))[i] = self.coords[i];
        }
        parts
    }

    /// Re-sum homogeneous parts.
    pub fn from_parts(&self, parts: &BTreeMap<usize, DVector<f64>>) -> DVector<f64> {
        parts
            .values()
            .fold(DVector::zeros(self.coords.len()), |acc, p| acc + p)
    }
}

/// Matrix of `∂ : Λᵏg₁⊗W → Λᵏ⁺¹g₁⊗W`,
/// `(∂α)_J = Σ_i (−1)^i X_{j_i}·α_{J∖j_i}`.
pub fn lie_differential(module: &GradedModule, k: usize) -> Result<DMatrix<f64>> {
    if k > MAX_DIFFERENTIAL_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "∂ is provided in degrees 0..={MAX_DIFFERENTIAL_DEGREE}, got {k}"
        )));
    }
    let src = FormSpace::new(module, k);
    let dst = FormSpace::new(module, k + 1);
    let dw = module.dim;
    let mut out = DMatrix::zeros(dst.dim(), src.dim());
    for (jdx, subset) in dst.exterior.iter().enumerate() {
        for (pos, &j) in subset.iter().enumerate() {
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<usize> = subset
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .map(|(_, &v)| v)
                .collect();
            let idx = src.exterior.index_of(&rest).expect("subset");
            let x = module.lowering(j);
            let mut block = out.view_mut((jdx * dw, idx * dw), (dw, dw));
            block += x * sign;
        }
    }
    Ok(out)
}

/// Matrix of `∂* : Λᵏg₁⊗W → Λᵏ⁻¹g₁⊗W`,
/// `∂*(Z_{i_1}∧…∧Z_{i_k}⊗w) = Σ_p (−1)^{p+1} Z_{i_1}∧…Ẑ_{i_p}…∧Z_{i_k}⊗Z_{i_p}·w`.
pub fn codifferential(module: &GradedModule, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 || k > MAX_CODIFFERENTIAL_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "∂* is provided in degrees 1..={MAX_CODIFFERENTIAL_DEGREE}, got {k}"
        )));
    }
    let src = FormSpace::new(module, k);
    let dst = FormSpace::new(module, k - 1);
    let dw = module.dim;
    let mut out = DMatrix::zeros(dst.dim(), src.dim());
    for (idx, subset) in src.exterior.iter().enumerate() {
        for (pos, &i) in subset.iter().enumerate() {
            // 0-based position p ↔ sign (−1)^{p}
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<usize> = subset
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .map(|(_, &v)| v)
                .collect();
            let jdx = dst.exterior.index_of(&rest).expect("subset");
            let z = module.raising(i);
            let mut block = out.view_mut((jdx * dw, idx * dw), (dw, dw));
            block += z * sign;
        }
    }
    Ok(out)
}

/// Largest entry of `m` that connects coordinates of different homogeneity.
pub fn off_block_defect(m: &DMatrix<f64>, rows: &FormSpace, cols: &FormSpace) -> f64 {
    let mut worst = 0.0_f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if rows.homogeneity_of(r) != cols.homogeneity_of(c) {
                worst = worst.max(m[(r, c)].abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::lie::GradedLieAlgebra;
    use crate::algebra::module::ModuleFamily;

    fn module(n: usize, family: ModuleFamily) -> GradedModule {
        let alg = GradedLieAlgebra::new(n).unwrap();
        GradedModule::new(&alg, family).unwrap()
    }

    #[test]
    fn standard_differential_in_degree_zero() {
        let n = 3;
        let m = module(n, ModuleFamily::Scalar { r: 2 });
        let d0 = lie_differential(&m, 0).unwrap();
        // Σ = (h, φ, f) ↦ (∂Σ)_a = (0, h e_a, −φ_a)
        let sigma = DVector::from_vec(vec![2.0, 0.5, -1.0, 3.0, 7.0]);
        let out = &d0 * &sigma;
        for a in 0..n {
            let block = out.rows(a * 5, 5);
            assert_eq!(block[0], 0.0);
            for b in 0..n {
                let expect = if a == b { 2.0 } else { 0.0 };
                assert_eq!(block[1 + b], expect);
            }
            assert_eq!(block[4], -sigma[1 + a]);
        }
        // bottom component is killed
        let bottom = DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!((&d0 * bottom).amax(), 0.0);
    }

    #[test]
    fn complexes_square_to_zero() {
        for (n, fam) in [
            (2, ModuleFamily::Scalar { r: 3 }),
            (3, ModuleFamily::Scalar { r: 2 }),
            (3, ModuleFamily::Adjoint),
        ] {
            let m = module(n, fam);
            for k in 0..MAX_DIFFERENTIAL_DEGREE {
                let a = lie_differential(&m, k).unwrap();
                let b = lie_differential(&m, k + 1).unwrap();
                assert!((b * a).amax() < 1e-12);
            }
            for k in 2..=MAX_CODIFFERENTIAL_DEGREE {
                let a = codifferential(&m, k).unwrap();
                let b = codifferential(&m, k - 1).unwrap();
                assert!((b * a).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn differentials_preserve_homogeneity() {
        let m = module(3, ModuleFamily::Scalar { r: 3 });
        for k in 0..=2 {
            let d = lie_differential(&m, k).unwrap();
            assert_eq!(
                off_block_defect(&d, &FormSpace::new(&m, k + 1), &FormSpace::new(&m, k)),
                0.0
            );
        }
        for k in 1..=3 {
            let d = codifferential(&m, k).unwrap();
            assert_eq!(
                off_block_defect(&d, &FormSpace::new(&m, k - 1), &FormSpace::new(&m, k)),
                0.0
            );
        }
    }

    #[test]
    fn trivial_module_has_zero_codifferential() {
        let m = module(3, ModuleFamily::Scalar { r: 1 });
        for k in 1..=3 {
            assert_eq!(codifferential(&m, k).unwrap().amax(), 0.0);
        }
    }

    #[test]
    fn degree_range_is_enforced() {
        let m = module(2, ModuleFamily::Scalar { r: 2 });
        assert!(lie_differential(&m, 3).is_err());
        assert!(codifferential(&m, 0).is_err());
        assert!(codifferential(&m, 4).is_err());
    }

    #[test]
    fn homogeneous_split_resums_exactly() {
        let m = module(3, ModuleFamily::Adjoint);
        let space = FormSpace::new(&m, 1);
        let coords = DVector::from_fn(space.dim(), |i, _| (i as f64 * 0.37).sin());
        let form = FormBlock::new(&m, 1, coords.clone()).unwrap();
        let parts = form.homogeneous_parts();
        assert_eq!(parts.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(form.from_parts(&parts), coords);
        assert!(FormBlock::new(&m, 1, DVector::zeros(3)).is_err());
    }
}
