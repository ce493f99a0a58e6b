//! Algebraic Hodge decomposition `Λᵏ = im ∂ ⊕ (ker ∂ ∩ ker ∂*) ⊕ im ∂*` and
//! the partial inverse `δ*`.
//!
//! Every subspace is computed one homogeneity block at a time, so all bases
//! are homogeneous and `δ*` has exact zeros off the diagonal blocks.

use nalgebra::DMatrix;

use super::forms::{codifferential, lie_differential, FormSpace};
use super::module::GradedModule;
use crate::linalg::{hstack, invert, null_space, rank, SingularSplit, RANK_TOL};
use crate::{Error, Result};

/// Homogeneous bases of the three Hodge summands in one degree.
#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    pub k: usize,
    /// `im ∂` (from degree `k−1`).
    pub image_d: DMatrix<f64>,
    /// `ker ∂ ∩ ker ∂*`.
    pub harmonic: DMatrix<f64>,
    /// `im ∂*` (from degree `k+1`).
    pub image_dstar: DMatrix<f64>,
    /// Homogeneity of each harmonic basis column.
    pub harmonic_homogeneity: Vec<usize>,
}

impl HodgeDecomposition {
    pub fn dims(&self) -> (usize, usize, usize) {
        (
            self.image_d.ncols(),
            self.harmonic.ncols(),
            self.image_dstar.ncols(),
        )
    }

    /// Harmonic part of a fixed homogeneity.
    pub fn harmonic_of_homogeneity(&self, h: usize) -> DMatrix<f64> {
        let cols: Vec<usize> = (0..self.harmonic.ncols())
            .filter(|&c| self.harmonic_homogeneity[c] == h)
            .collect();
        self.harmonic.select_columns(&cols)
    }
}

/// All differentials, Hodge decompositions and `δ*` maps of one module.
#[derive(Debug, Clone)]
pub struct KostantComplex {
    pub spaces: Vec<FormSpace>,
    /// `d[k] = ∂_k`, `k = 0..=2`.
    pub d: Vec<DMatrix<f64>>,
    /// `dstar[k] = ∂*_k`, `k = 1..=3` (`dstar[0]` is the empty map).
    pub dstar: Vec<DMatrix<f64>>,
    pub hodge: Vec<HodgeDecomposition>,
    /// `delta_star[k] = δ*_k`, `k = 1..=2` (`delta_star[0]` is empty).
    pub delta_star: Vec<DMatrix<f64>>,
}

impl KostantComplex {
    pub fn new(module: &GradedModule) -> Result<Self> {
        let spaces: Vec<FormSpace> = (0..=3).map(|k| FormSpace::new(module, k)).collect();
        let d = (0..=2)
            .map(|k| lie_differential(module, k))
            .collect::<Result<Vec<_>>>()?;
        let mut dstar = vec![DMatrix::zeros(0, spaces[0].dim())];
        for k in 1..=3 {
            dstar.push(codifferential(module, k)?);
        }
        let mut complex = KostantComplex {
            spaces,
            d,
            dstar,
            hodge: Vec::new(),
            delta_star: Vec::new(),
        };
        for k in 0..=2 {
            let h = complex.decompose(k)?;
            complex.hodge.push(h);
        }
        complex
            .delta_star
            .push(DMatrix::zeros(0, complex.spaces[0].dim()));
        for k in 1..=2 {
            let ds = complex.build_delta_star(k)?;
            complex.delta_star.push(ds);
        }
        Ok(complex)
    }

    /// `∂` out of degree `k−1` into degree `k`, or `None` for `k = 0`.
    fn d_into(&self, k: usize) -> Option<&DMatrix<f64>> {
        if k == 0 {
            None
        } else {
            Some(&self.d[k - 1])
        }
    }

    fn decompose(&self, k: usize) -> Result<HodgeDecomposition> {
        let space = &self.spaces[k];
        let dim = space.dim();
        let below = if k > 0 {
            Some(&self.spaces[k - 1])
        } else {
            None
        };
        let above = &self.spaces[k + 1];

        let mut image_d = Vec::new();
        let mut harmonic = Vec::new();
        let mut harmonic_h = Vec::new();
        let mut image_dstar = Vec::new();
        for (h, rows) in space.homogeneity_blocks() {
            // im ∂ restricted to sources of the same homogeneity
            if let (Some(dm), Some(bs)) = (self.d_into(k), below) {
                let src: Vec<usize> = (0..bs.dim())
                    .filter(|&i| bs.homogeneity_of(i) == h)
                    .collect();
                if !src.is_empty() {
                    let block = dm.select_columns(&src);
                    let range = SingularSplit::relative(&block, RANK_TOL).range();
                    image_d.extend(range.column_iter().map(|c| c.into_owned()));
                }
            }
            // ker ∂ ∩ ker ∂* inside this block
            let mut stacked_rows = Vec::new();
            let local_d = self.d[k].select_columns(&rows);
            stacked_rows.push(local_d);
            if k > 0 {
                stacked_rows.push(self.dstar[k].select_columns(&rows));
            }
            let refs: Vec<&DMatrix<f64>> = stacked_rows.iter().collect();
            let stacked = crate::linalg::vstack(&refs);
            let ker = if stacked.iter().all(|v| *v == 0.0) {
                DMatrix::identity(rows.len(), rows.len())
            } else {
                null_space(&stacked)
            };
            for c in ker.column_iter() {
                let mut full = nalgebra::DVector::zeros(dim);
                for (local, &i) in rows.iter().enumerate() {
                    full[i] = c[local];
                }
                harmonic.push(full);
                harmonic_h.push(h);
            }
            // im ∂* from the degree above
            let src: Vec<usize> = (0..above.dim())
                .filter(|&i| above.homogeneity_of(i) == h)
                .collect();
            if !src.is_empty() {
                let block = self.dstar[k + 1].select_columns(&src);
                let range = SingularSplit::relative(&block, RANK_TOL).range();
                image_dstar.extend(range.column_iter().map(|c| c.into_owned()));
            }
        }
        let to_matrix = |cols: Vec<nalgebra::DVector<f64>>| {
            if cols.is_empty() {
                DMatrix::zeros(dim, 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        };
        let decomposition = HodgeDecomposition {
            k,
            image_d: to_matrix(image_d),
            harmonic: to_matrix(harmonic),
            image_dstar: to_matrix(image_dstar),
            harmonic_homogeneity: harmonic_h,
        };
        self.check_decomposition(&decomposition)?;
        Ok(decomposition)
    }

    fn check_decomposition(&self, h: &HodgeDecomposition) -> Result<()> {
        let k = h.k;
        let dim = self.spaces[k].dim();
        let (a, b, c) = h.dims();
        let all = hstack(&[&h.image_d, &h.harmonic, &h.image_dstar]);
        if a + b + c != dim || rank(&all) != dim {
            return Err(Error::Invariant(format!(
                "Hodge decomposition in degree {k}: dims {a} + {b} + {c} do not span {dim}"
            )));
        }
        let ker_d = dim - rank(&self.d[k]);
        let ker_dstar = if k == 0 {
            dim
        } else {
            dim - rank(&self.dstar[k])
        };
        if a + b != ker_d || b + c != ker_dstar {
            return Err(Error::Invariant(format!(
                "Hodge decomposition in degree {k}: dim ker ∂ = {ker_d}, dim ker ∂* = {ker_dstar}, \
                 summands {a}, {b}, {c}"
            )));
        }
        Ok(())
    }

    /// `δ*_k = [R, 0]·[∂R, Q]⁻¹` per homogeneity block, with `R` a basis of
    /// `im ∂*_k` and `Q` a basis of `ker ∂*_k`.
    fn build_delta_star(&self, k: usize) -> Result<DMatrix<f64>> {
        let src = &self.spaces[k];
        let dst = &self.spaces[k - 1];
        let dstar = &self.dstar[k];
        let d = &self.d[k - 1];
        let mut out = DMatrix::zeros(dst.dim(), src.dim());
        for (h, rows) in src.homogeneity_blocks() {
            let targets: Vec<usize> = (0..dst.dim())
                .filter(|&i| dst.homogeneity_of(i) == h)
                .collect();
            let block_dstar = dstar.select_columns(&rows).select_rows(&targets);
            let block_d = d.select_columns(&targets).select_rows(&rows);
            let (r, q) = if targets.is_empty() {
                (
                    DMatrix::zeros(0, 0),
                    DMatrix::identity(rows.len(), rows.len()),
                )
            } else if block_dstar.iter().all(|v| *v == 0.0) {
                (
                    DMatrix::zeros(targets.len(), 0),
                    DMatrix::identity(rows.len(), rows.len()),
                )
            } else {
                let split = SingularSplit::relative(&block_dstar, RANK_TOL);
                (split.range(), split.kernel())
            };
            if r.ncols() == 0 {
                continue;
            }
            let dr = &block_d * &r;
            let frame = hstack(&[&dr, &q]);
            let inv = invert(
                &frame,
                &format!("∂ restricted to im ∂* (degree {k}, homogeneity {h})"),
            )?;
            let lift = hstack(&[&r, &DMatrix::zeros(targets.len(), q.ncols())]);
            let local = lift * inv;
            for (li, &ti) in targets.iter().enumerate() {
                for (lj, &sj) in rows.iter().enumerate() {
                    out[(ti, sj)] = local[(li, lj)];
                }
            }
        }
        Ok(out)
    }
}
