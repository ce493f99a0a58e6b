use nalgebra::DMatrix;
use num_bigint::BigUint;

use tractor_core::algebra::dimension::quoted_scalar_formula;
use tractor_core::algebra::*;
use tractor_core::indices::binomial;
use tractor_core::linalg::rank;

/// `δ*: Λ¹ ⊗ W → W` for the standard module written out by hand:
/// `(h_b, φ_bc, f_b) ↦ ((1/n)φ^c_c, −f_b, 0)`.
fn displayed_first(n: usize) -> DMatrix<f64> {
    let w = n + 2;
    let mut m = DMatrix::zeros(w, n * w);
    for b in 0..n {
        m[(0, b * w + 1 + b)] = 1.0 / n as f64;
        m[(1 + b, b * w + n + 1)] = -1.0;
    }
    m
}

/// `δ*: Λ² ⊗ W → Λ¹ ⊗ W`:
/// `(h_ab, φ_abc, f_ab) ↦ ((−1/(n−1))φ_ac^c, ½f_ab, 0)`, reading the
/// coefficient on the subset `{a<b}` and extending antisymmetrically.
fn displayed_second(n: usize) -> DMatrix<f64> {
    let w = n + 2;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut m = DMatrix::zeros(n * w, pairs.len() * w);
    let slot = |a: usize, b: usize| -> Option<(usize, f64)> {
        if a == b {
            return None;
        }
        let (lo, hi, s) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        Some((pairs.iter().position(|&p| p == (lo, hi)).unwrap(), s))
    };
    for a in 0..n {
        for c in 0..n {
            if let Some((p, s)) = slot(a, c) {
                m[(a * w, p * w + 1 + c)] += -s / (n as f64 - 1.0);
                m[(a * w + 1 + c, p * w + n + 1)] += 0.5 * s;
            }
        }
    }
    m
}

#[test]
fn delta_star_reproduces_displayed_maps() {
    for n in [2, 3, 4] {
        let ctx = AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap();
        let d1 = (&ctx.complex.delta_star[1] - displayed_first(n)).amax();
        let d2 = (&ctx.complex.delta_star[2] - displayed_second(n)).amax();
        assert!(d1 <= 1e-12, "n={n}: first {d1:e}");
        assert!(d2 <= 1e-12, "n={n}: second {d2:e}");
    }
}

fn hodge_cases() -> Vec<(usize, ModuleFamily)> {
    let mut v = vec![
        (2, ModuleFamily::Scalar { r: 1 }),
        (2, ModuleFamily::Scalar { r: 2 }),
        (2, ModuleFamily::Scalar { r: 3 }),
    ];
    for n in [3, 4] {
        for r in 1..=3 {
            v.push((n, ModuleFamily::Scalar { r }));
        }
        v.push((n, ModuleFamily::Adjoint));
    }
    v
}

#[test]
fn hodge_summands_fill_each_degree() {
    for (n, family) in hodge_cases() {
        let ctx = AlgebraContext::new(n, family).unwrap();
        let c = &ctx.complex;
        let dim_w = ctx.module.dim;
        for k in 0..=2 {
            let (im_d, harm, im_ds) = c.hodge[k].dims();
            let total = binomial(n, k) * dim_w;
            assert_eq!(im_d + harm + im_ds, total, "{} n={n} k={k}", family.label());
            let ker_d = total - rank(&c.d[k]);
            let ker_ds = if k == 0 {
                total
            } else {
                total - rank(&c.dstar[k])
            };
            assert_eq!(im_d + harm, ker_d, "{} n={n} k={k}", family.label());
            assert_eq!(harm + im_ds, ker_ds, "{} n={n} k={k}", family.label());
        }
    }
}

#[test]
fn delta_star_is_partial_inverse() {
    for (n, family) in hodge_cases() {
        let ctx = AlgebraContext::new(n, family).unwrap();
        let c = &ctx.complex;
        for k in 1..=2 {
            // δ*∂δ* = δ*, ∂δ*∂ = ∂ and δ* kills ker ∂*
            let ds = &c.delta_star[k];
            let d = &c.d[k - 1];
            assert!((ds * d * ds - ds).amax() < 1e-10);
            assert!((d * ds * d - d).amax() < 1e-10);
            assert!((ds * &c.hodge[k].harmonic).amax() < 1e-10);
        }
    }
}

#[test]
fn cohomology_matches_kostant() {
    for (n, r, h1) in [(3, 2, 5), (3, 3, 7), (2, 2, 2), (2, 3, 2), (4, 2, 9)] {
        let family = ModuleFamily::Scalar { r };
        let ctx = AlgebraContext::new(n, family).unwrap();
        let (_, h0, _) = ctx.complex.hodge[0].dims();
        let (_, h1_dim, _) = ctx.complex.hodge[1].dims();
        assert_eq!(h0, ctx.module.bottom_dim(), "n={n} r={r}");
        assert_eq!(h0, 1);
        assert_eq!(h1_dim, tracefree_symmetric_dimension(n, r));
        assert_eq!(h1_dim, h1);
        // H₁ sits in homogeneity r
        assert_eq!(ctx.complex.hodge[1].harmonic_of_homogeneity(r).ncols(), h1);
    }
}

#[test]
fn dimension_formulas() {
    for n in 3..=8 {
        assert_eq!(
            killing_tensor_dimension(n, 1).unwrap(),
            (n + 1) * (n + 2) / 2
        );
    }
    for n in 2..=4 {
        for r in 1..=3 {
            let family = ModuleFamily::Scalar { r };
            let built = AlgebraContext::new(n, family).unwrap().module.dim;
            assert_eq!(built, module_dimension(family, n).unwrap());
        }
    }
    assert_eq!(quoted_scalar_formula(2, 3).unwrap(), BigUint::from(1080u32));
    assert_ne!(
        quoted_scalar_formula(2, 3).unwrap(),
        BigUint::from(module_dimension(ModuleFamily::Scalar { r: 3 }, 2).unwrap())
    );
}
