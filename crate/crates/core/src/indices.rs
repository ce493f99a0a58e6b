//! Index bookkeeping: binomials, exterior bases, monomial exponents and
//! tensor multi-indices.

use std::collections::HashMap;

use nalgebra::DMatrix;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Strictly increasing `k`-subsets of `0..n` in lexicographic order; this is
/// the coordinate basis `e^I` of `Λ^k ℝ^n`.
#[derive(Debug, Clone)]
pub struct ExteriorBasis {
    pub n: usize,
    pub k: usize,
    subsets: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl ExteriorBasis {
    pub fn new(n: usize, k: usize) -> Self {
        let mut subsets = Vec::new();
        let mut current = Vec::with_capacity(k);
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(0, n, k, &mut current, &mut subsets);
        let lookup = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        ExteriorBasis {
            n,
            k,
            subsets,
            lookup,
        }
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset(&self, i: usize) -> &[usize] {
        &self.subsets[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.subsets.iter().map(|s| s.as_slice())
    }

    pub fn index_of(&self, subset: &[usize]) -> Option<usize> {
        self.lookup.get(subset).copied()
    }
}

/// Exponent vectors of total degree `≤ degree` in `n` variables, graded by
/// total degree and within one degree in descending lexicographic order
/// (so `x1` precedes `x2`).
pub fn graded_exponents(n: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 0..=degree {
        out.extend(exponents_of_degree(n, d));
    }
    out
}

/// Exponent vectors of total degree exactly `d`, descending lexicographic.
pub fn exponents_of_degree(n: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u32; n];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let n = cur.len();
        if pos == n - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
    }
    rec(0, d as u32, &mut cur, &mut out);
    out
}

/// All tuples in `[0, n)^k`, first slot most significant.
pub fn tensor_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = n.pow(k as u32);
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; k];
            for slot in (0..k).rev() {
                idx[slot] = flat % n;
                flat /= n;
            }
            idx
        })
        .collect()
}

pub fn flatten_tensor_index(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Orthogonal projector onto symmetric tensors in `⊗^k ℝ^n`.
pub fn symmetrizer(n: usize, k: usize) -> DMatrix<f64> {
    let idx = tensor_indices(n, k);
    let dim = idx.len();
    let mut p = DMatrix::zeros(dim, dim);
    let perms = permutations(k);
    let w = 1.0 / perms.len() as f64;
    for (col, t) in idx.iter().enumerate() {
        for perm in &perms {
            let permuted: Vec<usize> = perm.iter().map(|&s| t[s]).collect();
            p[(flatten_tensor_index(n, &permuted), col)] += w;
        }
    }
    p
}

/// Contraction of the first two slots with the Euclidean form,
/// `⊗^k ℝ^n → ⊗^{k-2} ℝ^n`.
pub fn euclidean_trace(n: usize, k: usize) -> DMatrix<f64> {
    assert!(k >= 2);
    let src = tensor_indices(n, k);
    let dst_dim = n.pow((k - 2) as u32);
    let mut m = DMatrix::zeros(dst_dim, src.len());
    for (col, t) in src.iter().enumerate() {
        if t[0] == t[1] {
            m[(flatten_tensor_index(n, &t[2..]), col)] += 1.0;
        }
    }
    m
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn heap(m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..m {
            heap(m - 1, cur, out);
            if m % 2 == 0 {
                cur.swap(i, m - 1);
            } else {
                cur.swap(0, m - 1);
            }
        }
    }
    heap(k, &mut cur, &mut out);
    out
}
