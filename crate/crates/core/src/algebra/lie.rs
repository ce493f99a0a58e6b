//! Matrix model of `o(n+1,1)` with its |1|-grading.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

const EXACT: f64 = 1e-13;

/// Grade of a basis element of `g = g₋₁ ⊕ g₀ ⊕ g₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Minus,
    Zero,
    Plus,
}

impl Grade {
    pub fn value(self) -> i32 {
        match self {
            Grade::Minus => -1,
            Grade::Zero => 0,
            Grade::Plus => 1,
        }
    }

    fn from_value(v: i32) -> Option<Grade> {
        match v {
            -1 => Some(Grade::Minus),
            0 => Some(Grade::Zero),
            1 => Some(Grade::Plus),
            _ => None,
        }
    }
}

/// `o(n+1,1)` realised as `(n+2)×(n+2)` matrices skew with respect to the
/// light-cone form `x₀y_{n+1} + x_{n+1}y₀ + Σ xᵢyᵢ`.
///
/// Basis order: `g₋₁` is `X_1..X_n`, `g₀` is the grading element `E`
/// followed by the rotations `A_ij` (`i < j`, lexicographic), `g₁` is
/// `Z_1..Z_n`.
#[derive(Debug, Clone)]
pub struct GradedLieAlgebra {
    pub n: usize,
    pub form: DMatrix<f64>,
    pub basis_minus1: Vec<DMatrix<f64>>,
    pub basis_0: Vec<DMatrix<f64>>,
    pub basis_1: Vec<DMatrix<f64>>,
    pub grading: DMatrix<f64>,
    rotation_pairs: Vec<(usize, usize)>,
}

impl GradedLieAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "chart dimension must be at least 2, got {n}"
            )));
        }
        let size = n + 2;
        let last = n + 1;
        let mut form = DMatrix::zeros(size, size);
        form[(0, last)] = 1.0;
        form[(last, 0)] = 1.0;
        for i in 1..=n {
            form[(i, i)] = 1.0;
        }

        let basis_minus1 = (1..=n)
            .map(|i| {
                let mut m = DMatrix::zeros(size, size);
                m[(i, 0)] = 1.0;
                m[(last, i)] = -1.0;
                m
            })
            .collect();
        let basis_1 = (1..=n)
            .map(|i| {
                let mut m = DMatrix::zeros(size, size);
                m[(0, i)] = 1.0;
                m[(i, last)] = -1.0;
                m
            })
            .collect();

        let mut grading = DMatrix::zeros(size, size);
        grading[(0, 0)] = 1.0;
        grading[(last, last)] = -1.0;

        let mut basis_0 = vec![grading.clone()];
        let mut rotation_pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut m = DMatrix::zeros(size, size);
                m[(i + 1, j + 1)] = 1.0;
                m[(j + 1, i + 1)] = -1.0;
                basis_0.push(m);
                rotation_pairs.push((i, j));
            }
        }

        Ok(GradedLieAlgebra {
            n,
            form,
            basis_minus1,
            basis_0,
            basis_1,
            grading,
            rotation_pairs,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis_minus1.len() + self.basis_0.len() + self.basis_1.len()
    }

    /// Dimensions of `(g₋₁, g₀, g₁)`.
    pub fn graded_dims(&self) -> (usize, usize, usize) {
        (
            self.basis_minus1.len(),
            self.basis_0.len(),
            self.basis_1.len(),
        )
    }

    /// All basis elements with their grades, in the fixed global order
    /// `g₋₁, g₀, g₁`.
    pub fn basis(&self) -> impl Iterator<Item = (Grade, &DMatrix<f64>)> {
        self.basis_minus1
            .iter()
            .map(|m| (Grade::Minus, m))
            .chain(self.basis_0.iter().map(|m| (Grade::Zero, m)))
            .chain(self.basis_1.iter().map(|m| (Grade::Plus, m)))
    }

    /// Index pairs `(i, j)` (0-based, `i < j`) of the rotation generators,
    /// aligned with `basis_0[1..]`.
    pub fn rotation_pairs(&self) -> &[(usize, usize)] {
        &self.rotation_pairs
    }

    /// Global basis index of `A_ij`.
    pub fn rotation_index(&self, i: usize, j: usize) -> Option<usize> {
        self.rotation_pairs
            .iter()
            .position(|&p| p == (i, j))
            .map(|p| self.n + 1 + p)
    }

    pub fn global_index(&self, grade: Grade, local: usize) -> usize {
        match grade {
            Grade::Minus => local,
            Grade::Zero => self.n + local,
            Grade::Plus => self.n + self.basis_0.len() + local,
        }
    }

    pub fn bracket(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b - b * a
    }

    /// Coordinates of a matrix of `g` in the global basis. The matrix entries
    /// read off below are exactly the free parameters of the block form.
    pub fn coordinates(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let n = self.n;
        let mut c = DVector::zeros(self.dim());
        for i in 0..n {
            c[i] = m[(i + 1, 0)];
        }
        c[n] = m[(0, 0)];
        for (p, &(i, j)) in self.rotation_pairs.iter().enumerate() {
            c[n + 1 + p] = m[(i + 1, j + 1)];
        }
        let off = n + self.basis_0.len();
        for i in 0..n {
            c[off + i] = m[(0, i + 1)];
        }
        c
    }

    pub fn element(&self, coords: &DVector<f64>) -> DMatrix<f64> {
        let size = self.n + 2;
        self.basis()
            .zip(coords.iter())
            .fold(DMatrix::zeros(size, size), |acc, ((_, b), &c)| acc + b * c)
    }

    /// Checks every structural identity of the graded algebra.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        let (dm, d0, dp) = self.graded_dims();
        if dm != n || dp != n || d0 != n * (n - 1) / 2 + 1 || self.dim() != (n + 2) * (n + 1) / 2 {
            return Err(Error::Invariant(format!(
                "graded dimensions ({dm}, {d0}, {dp}) wrong for n = {n}"
            )));
        }
        for (grade, m) in self.basis() {
            let skew = m.transpose() * &self.form + &self.form * m;
            if skew.amax() > EXACT {
                return Err(Error::Invariant(
                    "basis element not skew for the form".into(),
                ));
            }
            let ad = Self::bracket(&self.grading, m) - m * grade.value() as f64;
            if ad.amax() > EXACT {
                return Err(Error::Invariant(format!(
                    "[E, X] ≠ {}·X for a basis element",
                    grade.value()
                )));
            }
        }
        let all: Vec<(Grade, &DMatrix<f64>)> = self.basis().collect();
        for &(ga, a) in &all {
            for &(gb, b) in &all {
                let br = Self::bracket(a, b);
                let target = Grade::from_value(ga.value() + gb.value());
                let coords = self.coordinates(&br);
                if (&br - self.element(&coords)).amax() > EXACT {
                    return Err(Error::Invariant("bracket leaves the algebra".into()));
                }
                for (idx, (g, _)) in all.iter().enumerate() {
                    if Some(*g) != target && coords[idx].abs() > EXACT {
                        return Err(Error::Invariant(format!(
                            "[g_{}, g_{}] has a component in g_{}",
                            ga.value(),
                            gb.value(),
                            g.value()
                        )));
                    }
                }
            }
        }
        for a in &self.basis_1 {
            for b in &self.basis_1 {
                if Self::bracket(a, b).amax() > EXACT {
                    return Err(Error::Invariant("g₁ is not abelian".into()));
                }
            }
        }
        Ok(())
    }
}
