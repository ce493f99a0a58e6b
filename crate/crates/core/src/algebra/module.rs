//! Graded representations of `o(n+1,1)`.
//!
//! Two families are realised explicitly as tensor representations of
//! `V = ℝ^{n+2}`:
//!
//! * scalar family `(ℝ, r)` as the `J`-tracefree symmetric power `S^{r-1}₀V`,
//! * adjoint family (`W₀ = ℝⁿ`, `r = 1`) as `Λ²V ≅ o(n+1,1)`.
//!
//! Module coordinates are chosen adapted to the grading element, listed in
//! descending `E`-eigenvalue, so that for `r = 2` they coincide with the
//! coordinates `(x₀, x₁..x_n, x_{n+1})` of `V` itself.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lie::GradedLieAlgebra;
use crate::indices::exponents_of_degree;
use crate::linalg::SingularSplit;
use crate::{Error, Result};

const EXACT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModuleFamily {
    /// Trivial `W₀`, realised as `S^{r-1}₀V`.
    Scalar { r: usize },
    /// `W₀ = ℝⁿ`, `r = 1`, realised as `Λ²V`.
    Adjoint,
}

impl ModuleFamily {
    /// The integer `r` of the pair `(W₀, r)`.
    pub fn r(&self) -> usize {
        match self {
            ModuleFamily::Scalar { r } => *r,
            ModuleFamily::Adjoint => 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModuleFamily::Scalar { r } => format!("scalar(r={r})"),
            ModuleFamily::Adjoint => "adjoint".to_string(),
        }
    }
}

/// One `E`-eigenspace `W_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub eigenvalue: i32,
    /// Module coordinates spanning this eigenspace.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GradedModule {
    pub family: ModuleFamily,
    pub n: usize,
    pub dim: usize,
    /// `ρ(b)` for every algebra basis element, in the algebra's global order.
    pub action: Vec<DMatrix<f64>>,
    /// `W₀, …, W_N` by ascending eigenvalue.
    pub components: Vec<Component>,
    /// Component number `j` of every coordinate.
    level: Vec<usize>,
    /// Columns embed the module into the ambient tensor space.
    embedding: DMatrix<f64>,
    ambient: Ambient,
}

#[derive(Debug, Clone)]
enum Ambient {
    Symmetric { exponents: Vec<Vec<u32>> },
    Wedge { pairs: Vec<(usize, usize)> },
}

impl GradedModule {
    pub fn new(alg: &GradedLieAlgebra, family: ModuleFamily) -> Result<Self> {
        let n = alg.n;
        match family {
            ModuleFamily::Scalar { r } if r < 1 => {
                return Err(Error::InvalidArgument("scalar family needs r ≥ 1".into()))
            }
            ModuleFamily::Adjoint if n < 3 => return Err(Error::InvalidArgument(
                "adjoint family needs n ≥ 3 (solution spaces are infinite-dimensional for n = 2)"
                    .into(),
            )),
            _ => {}
        }
        let (ambient, weights, embedding) = match family {
            ModuleFamily::Scalar { r } => symmetric_tracefree(alg, r - 1),
            ModuleFamily::Adjoint => wedge_two(alg),
        };
        let mut module = GradedModule {
            family,
            n,
            dim: embedding.ncols(),
            action: Vec::new(),
            components: Vec::new(),
            level: Vec::new(),
            embedding,
            ambient,
        };
        module.action = alg.basis().map(|(_, m)| module.represent(m)).collect();

        let mut by_eig: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, w) in weights.iter().enumerate() {
            by_eig.entry(*w).or_default().push(i);
        }
        module.components = by_eig
            .into_iter()
            .map(|(eigenvalue, indices)| Component {
                eigenvalue,
                indices,
            })
            .collect();
        let mut level = vec![0; module.dim];
        for (j, c) in module.components.iter().enumerate() {
            for &i in &c.indices {
                level[i] = j;
            }
        }
        module.level = level;
        Ok(module)
    }

    /// Induced action of an arbitrary matrix of `gl(n+2)` that preserves the
    /// module (in particular any element of `o(n+1,1)`).
    pub fn represent(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let ambient = match &self.ambient {
            Ambient::Symmetric { exponents } => symmetric_power_action(exponents, m),
            Ambient::Wedge { pairs } => wedge_action(pairs, m),
        };
        self.embedding.transpose() * ambient * &self.embedding
    }

    /// `N`, the index of the top component.
    pub fn top(&self) -> usize {
        self.components.len() - 1
    }

    pub fn component_dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.indices.len()).collect()
    }

    pub fn level_of(&self, coord: usize) -> usize {
        self.level[coord]
    }

    pub fn bottom(&self) -> &Component {
        &self.components[0]
    }

    /// `dim W₀`.
    pub fn bottom_dim(&self) -> usize {
        self.components[0].indices.len()
    }

    /// Unit-vector basis of `W_j` as columns.
    pub fn component_basis(&self, j: usize) -> DMatrix<f64> {
        let idx = &self.components[j].indices;
        let mut b = DMatrix::zeros(self.dim, idx.len());
        for (col, &i) in idx.iter().enumerate() {
            b[(i, col)] = 1.0;
        }
        b
    }

    /// Restriction of a module vector to the coordinates of `W_j`.
    pub fn component(&self, v: &DVector<f64>, j: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.components[j].indices.len(),
            self.components[j].indices.iter().map(|&i| v[i]),
        )
    }

    /// Module vector with only `W_j` filled in.
    pub fn embed_component(&self, values: &DVector<f64>, j: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim);
        for (k, &i) in self.components[j].indices.iter().enumerate() {
            v[i] = values[k];
        }
        v
    }

    /// Action matrix of `X_i ∈ g₋₁` (0-based `i`).
    pub fn lowering(&self, i: usize) -> &DMatrix<f64> {
        &self.action[i]
    }

    /// Action matrix of `Z_i ∈ g₁` (0-based `i`).
    pub fn raising(&self, i: usize) -> &DMatrix<f64> {
        let off = self.action.len() - self.n;
        &self.action[off + i]
    }

    pub fn grading_action(&self) -> &DMatrix<f64> {
        &self.action[self.n]
    }

    /// Action of the rotation generator `A_ij` (`i < j`, 0-based).
    pub fn rotation(&self, alg: &GradedLieAlgebra, i: usize, j: usize) -> &DMatrix<f64> {
        &self.action[alg.rotation_index(i, j).expect("rotation pair")]
    }

    pub fn check_invariants(&self, alg: &GradedLieAlgebra) -> Result<()> {
        let basis: Vec<&DMatrix<f64>> = alg.basis().map(|(_, m)| m).collect();
        for (a, ma) in basis.iter().enumerate() {
            for (b, mb) in basis.iter().enumerate().skip(a + 1) {
                let lhs = self.represent(&GradedLieAlgebra::bracket(ma, mb));
                let rhs = &self.action[a] * &self.action[b] - &self.action[b] * &self.action[a];
                if (lhs - rhs).amax() > EXACT {
                    return Err(Error::Invariant(format!(
                        "{}: action is not a homomorphism on basis pair ({a}, {b})",
                        self.family.label()
                    )));
                }
            }
        }

        let e = self.grading_action();
        let lowest = self.components[0].eigenvalue;
        let mut seen = 0;
        for (j, c) in self.components.iter().enumerate() {
            if c.eigenvalue != lowest + j as i32 {
                return Err(Error::Invariant(
                    "eigenvalues of E are not an unbroken range".into(),
                ));
            }
            let basis = self.component_basis(j);
            let defect = e * &basis - &basis * c.eigenvalue as f64;
            if defect.amax() > EXACT {
                return Err(Error::Invariant(format!("W_{j} is not an E-eigenspace")));
            }
            seen += c.indices.len();
        }
        if seen != self.dim {
            return Err(Error::Invariant("components do not span the module".into()));
        }

        for (grade, m) in alg.basis() {
            let rho = self.represent(m);
            for row in 0..self.dim {
                for col in 0..self.dim {
                    let shift = self.level[row] as i32 - self.level[col] as i32;
                    if shift != grade.value() && rho[(row, col)] != 0.0 {
                        return Err(Error::Invariant(format!(
                            "g_{} maps W_{} outside W_{}",
                            grade.value(),
                            self.level[col],
                            self.level[col] as i32 + grade.value()
                        )));
                    }
                }
            }
        }

        let (expect_bottom, expect_top) = match self.family {
            ModuleFamily::Scalar { r } => (1, 2 * (r - 1)),
            ModuleFamily::Adjoint => (self.n, 2),
        };
        if self.bottom_dim() != expect_bottom || self.top() != expect_top {
            return Err(Error::Invariant(format!(
                "{}: dim W₀ = {}, N = {}; expected {expect_bottom}, {expect_top}",
                self.family.label(),
                self.bottom_dim(),
                self.top()
            )));
        }
        Ok(())
    }
}

/// E-weight of a basis vector `e_i` of `V`.
fn vector_weight(i: usize, n: usize) -> i32 {
    if i == 0 {
        1
    } else if i == n + 1 {
        -1
    } else {
        0
    }
}

/// Monomial basis of `S^m V` sorted by descending weight; the module is
/// the kernel of `Σ J^{ab} ∂_a ∂_b` (tracefree part).
fn symmetric_tracefree(alg: &GradedLieAlgebra, m: usize) -> (Ambient, Vec<i32>, DMatrix<f64>) {
    let n = alg.n;
    let vars = n + 2;
    let weight = |e: &[u32]| e[0] as i32 - e[n + 1] as i32;
    let mut exponents = exponents_of_degree(vars, m);
    // stable: descending lexicographic inside each weight
    exponents.sort_by_key(|e| -weight(e));

    let lower = if m >= 2 {
        exponents_of_degree(vars, m - 2)
    } else {
        Vec::new()
    };
    let trace = trace_operator(&exponents, &lower, &alg.form);

    let mut columns: Vec<DVector<f64>> = Vec::new();
    let mut weights = Vec::new();
    let mut start = 0;
    while start < exponents.len() {
        let w = weight(&exponents[start]);
        let mut end = start;
        while end < exponents.len() && weight(&exponents[end]) == w {
            end += 1;
        }
        let block = trace.columns(start, end - start).into_owned();
        let kernel = if block.amax() == 0.0 {
            DMatrix::identity(end - start, end - start)
        } else {
            SingularSplit::relative(&block, crate::linalg::RANK_TOL).kernel()
        };
        for c in 0..kernel.ncols() {
            let mut col = DVector::zeros(exponents.len());
            col.rows_mut(start, end - start)
                .copy_from(&kernel.column(c));
            columns.push(col);
            weights.push(w);
        }
        start = end;
    }
    let embedding = if columns.is_empty() {
        DMatrix::zeros(exponents.len(), 0)
    } else {
        DMatrix::from_columns(&columns)
    };
    (Ambient::Symmetric { exponents }, weights, embedding)
}

/// Contraction with the form on polynomial representatives.
fn trace_operator(src: &[Vec<u32>], dst: &[Vec<u32>], form: &DMatrix<f64>) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(dst.len(), src.len());
    let vars = form.nrows();
    for (col, e) in src.iter().enumerate() {
        for a in 0..vars {
            for b in 0..vars {
                let g = form[(a, b)];
                if g == 0.0 {
                    continue;
                }
                let mut d = e.clone();
                let mut coeff = g;
                if d[a] == 0 {
                    continue;
                }
                coeff *= d[a] as f64;
                d[a] -= 1;
                if d[b] == 0 {
                    continue;
                }
                coeff *= d[b] as f64;
                d[b] -= 1;
                let row = dst
                    .iter()
                    .position(|x| *x == d)
                    .expect("lower degree monomial");
                t[(row, col)] += coeff;
            }
        }
    }
    t
}

/// Derivation action `p ↦ Σ M_{li} x_l ∂_i p` on monomials of fixed degree.
fn symmetric_power_action(exponents: &[Vec<u32>], m: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = exponents.len();
    let vars = m.nrows();
    let index: std::collections::HashMap<&[u32], usize> = exponents
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_slice(), i))
        .collect();
    let mut out = DMatrix::zeros(dim, dim);
    for (col, e) in exponents.iter().enumerate() {
        for i in 0..vars {
            if e[i] == 0 {
                continue;
            }
            for l in 0..vars {
                let c = m[(l, i)];
                if c == 0.0 {
                    continue;
                }
                let mut d = e.clone();
                d[i] -= 1;
                d[l] += 1;
                out[(index[d.as_slice()], col)] += c * e[i] as f64;
            }
        }
    }
    out
}

fn wedge_two(alg: &GradedLieAlgebra) -> (Ambient, Vec<i32>, DMatrix<f64>) {
    let n = alg.n;
    let vars = n + 2;
    let mut pairs = Vec::new();
    for i in 0..vars {
        for j in (i + 1)..vars {
            pairs.push((i, j));
        }
    }
    let weight = |&(i, j): &(usize, usize)| vector_weight(i, n) + vector_weight(j, n);
    pairs.sort_by_key(|p| -weight(p));
    let weights = pairs.iter().map(weight).collect();
    let dim = pairs.len();
    (
        Ambient::Wedge { pairs },
        weights,
        DMatrix::identity(dim, dim),
    )
}

fn wedge_action(pairs: &[(usize, usize)], m: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = pairs.len();
    let vars = m.nrows();
    let mut out = DMatrix::zeros(dim, dim);
    let put = |a: usize, b: usize, c: f64, col: usize, out: &mut DMatrix<f64>| {
        if a == b || c == 0.0 {
            return;
        }
        let (key, sign) = if a < b { ((a, b), 1.0) } else { ((b, a), -1.0) };
        let row = pairs.iter().position(|&p| p == key).expect("pair");
        out[(row, col)] += sign * c;
    };
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for l in 0..vars {
            put(l, j, m[(l, i)], col, &mut out);
            put(i, l, m[(l, j)], col, &mut out);
        }
    }
    out
}
