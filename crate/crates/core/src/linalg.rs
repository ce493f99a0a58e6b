//! Small dense linear algebra helpers built on singular value decompositions.
//!
//! Every rank decision in the crate goes through [`SingularSplit`], so the
//! thresholding policy lives in one place.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative singular value threshold for exact-rational algebraic matrices.
pub const RANK_TOL: f64 = 1e-10;

/// Full SVD of a (possibly rectangular) matrix.
///
/// nalgebra computes thin decompositions, so wide matrices are padded with
/// zero rows; this makes `v` a complete orthonormal basis of the domain.
#[derive(Debug, Clone)]
pub struct FullSvd {
    /// Left singular vectors, `rows × min(rows, cols)`.
    pub u: DMatrix<f64>,
    /// Singular values in descending order, length `cols`.
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns, `cols × cols`.
    pub v: DMatrix<f64>,
}

impl FullSvd {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        if cols == 0 {
            return FullSvd {
                u: DMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v: DMatrix::zeros(0, 0),
            };
        }
        if rows == 0 {
            return FullSvd {
                u: DMatrix::zeros(0, 0),
                singular_values: vec![0.0; cols],
                v: DMatrix::identity(cols, cols),
            };
        }
        let padded;
        let work = if rows < cols {
            padded = {
                let mut p = DMatrix::zeros(cols, cols);
                p.view_mut((0, 0), (rows, cols)).copy_from(m);
                p
            };
            &padded
        } else {
            m
        };
        let svd = work.clone().svd(true, true);
        let mut u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let sv = svd.singular_values;
        // nalgebra does not guarantee ordering.
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| {
            sv[b]
                .partial_cmp(&sv[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let singular_values: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
        let mut v = DMatrix::zeros(cols, cols);
        let mut u_sorted = DMatrix::zeros(u.nrows(), order.len());
        for (dst, &src) in order.iter().enumerate() {
            v.set_column(dst, &v_t.row(src).transpose());
            u_sorted.set_column(dst, &u.column(src));
        }
        u = u_sorted;
        if rows < cols {
            u = u.rows(0, rows).into_owned();
        }
        FullSvd {
            u,
            singular_values,
            v,
        }
    }
}

/// Split of a matrix spectrum into retained and discarded singular values.
#[derive(Debug, Clone)]
pub struct SingularSplit {
    pub svd: FullSvd,
    pub rank: usize,
}

impl SingularSplit {
    /// Threshold relative to the largest singular value.
    pub fn relative(m: &DMatrix<f64>, rel_tol: f64) -> Self {
        let svd = FullSvd::new(m);
        let top = svd.singular_values.first().copied().unwrap_or(0.0);
        let cutoff = rel_tol * top;
        let rank = if top == 0.0 {
            0
        } else {
            svd.singular_values.iter().filter(|&&s| s > cutoff).count()
        };
        SingularSplit { svd, rank }
    }

    /// Absolute threshold on the singular values.
    pub fn absolute(m: &DMatrix<f64>, abs_tol: f64) -> Self {
        let svd = FullSvd::new(m);
        let rank = svd.singular_values.iter().filter(|&&s| s > abs_tol).count();
        SingularSplit { svd, rank }
    }

    /// Orthonormal basis of the column space.
    pub fn range(&self) -> DMatrix<f64> {
        let rows = self.svd.u.nrows();
        if self.rank == 0 {
            return DMatrix::zeros(rows, 0);
        }
        self.svd.u.columns(0, self.rank).into_owned()
    }

    /// Orthonormal basis of the (numerical) kernel.
    pub fn kernel(&self) -> DMatrix<f64> {
        let cols = self.svd.v.ncols();
        self.svd.v.columns(self.rank, cols - self.rank).into_owned()
    }

    /// Ratio between the smallest retained and the largest discarded value.
    /// `None` when one side is empty.
    pub fn gap_ratio(&self) -> Option<f64> {
        let sv = &self.svd.singular_values;
        if self.rank == 0 || self.rank >= sv.len() {
            return None;
        }
        let kept = sv[self.rank - 1];
        let dropped = sv[self.rank];
        Some(if dropped == 0.0 {
            f64::INFINITY
        } else {
            kept / dropped
        })
    }
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    SingularSplit::relative(m, RANK_TOL).rank
}

pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    SingularSplit::relative(m, RANK_TOL).range()
}

pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    SingularSplit::relative(m, RANK_TOL).kernel()
}

/// Horizontal concatenation; all blocks must share the row count.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks must share the column count.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

/// Orthonormal basis of the intersection of two column spans.
pub fn intersection(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let qa = column_space(a);
    let qb = column_space(b);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    // x = qa·s = qb·t  <=>  [qa, -qb]·(s, t) = 0
    let stacked = hstack(&[&qa, &(-&qb)]);
    let ker = null_space(&stacked);
    let coeffs = ker.rows(0, qa.ncols()).into_owned();
    column_space(&(&qa * coeffs))
}

/// Largest absolute entry (0 for empty matrices).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Distance of the columns of `m` from the span of the orthonormal `basis`.
pub fn residual_from_span(basis: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    if basis.ncols() == 0 {
        return max_abs(m);
    }
    let proj = basis * (basis.transpose() * m);
    max_abs(&(m - proj))
}

/// Solve a square system, reporting singularity as an invariant failure.
pub fn invert(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let split = SingularSplit::relative(m, RANK_TOL);
    if split.rank < m.ncols() || m.nrows() != m.ncols() {
        return Err(Error::Invariant(format!(
            "{what}: matrix of shape {:?} has numerical rank {}",
            m.shape(),
            split.rank
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Invariant(format!("{what}: inversion failed")))
}

/// Moore–Penrose pseudo-inverse with the crate-wide rank tolerance.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let split = SingularSplit::relative(m, RANK_TOL);
    let (rows, cols) = m.shape();
    let mut out = DMatrix::zeros(cols, rows);
    for i in 0..split.rank {
        let s = split.svd.singular_values[i];
        let u = split.svd.u.column(i);
        let v = split.svd.v.column(i);
        out += (v * u.transpose()) / s;
    }
    out
}
