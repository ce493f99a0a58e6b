use std::sync::Arc;

use tractor_core::algebra::{
    killing_tensor_dimension, module_dimension, AlgebraContext, ModuleFamily,
};
use tractor_core::geometry::MetricChart;
use tractor_core::oracle::*;
use tractor_core::prolongation::{
    rectangle_loops, solution_space, splitting_operator, ClosedSystem, PolynomialSource,
    SolutionSpace,
};

fn operator_for(family: ModuleFamily) -> CollocationOperator {
    match family {
        ModuleFamily::Scalar { r } => CollocationOperator::FlatScalar { r },
        ModuleFamily::Adjoint => CollocationOperator::FlatConformalKilling,
    }
}

#[test]
fn resampling_does_not_change_dimensions() {
    for (n, op, dim) in [
        (3, CollocationOperator::FlatScalar { r: 2 }, 5),
        (2, CollocationOperator::FlatScalar { r: 3 }, 9),
        (3, CollocationOperator::FlatConformalKilling, 10),
        (
            3,
            CollocationOperator::SphereTracefreeHessian { radius: 1.0 },
            5,
        ),
    ] {
        for seed in 0..5 {
            let opts = CollocationOptions {
                seed: 100 + seed,
                ..Default::default()
            };
            let ns = collocation_nullspace(n, &op, op.natural_degree(), &opts).unwrap();
            assert_eq!(ns.dimension, dim, "{op:?} seed {seed}");
        }
    }
}

#[test]
fn conformal_killing_dimensions_match_formula() {
    for n in [3, 4] {
        let (ns, above) = collocation_with_margin(
            n,
            &CollocationOperator::FlatConformalKilling,
            &Default::default(),
        )
        .unwrap();
        assert_eq!(ns.dimension, killing_tensor_dimension(n, 1).unwrap());
        assert_eq!(above.dimension, ns.dimension);
    }
}

#[test]
fn oracle_and_holonomy_agree_on_flat_model() {
    for (n, family) in [
        (2, ModuleFamily::Scalar { r: 2 }),
        (3, ModuleFamily::Scalar { r: 2 }),
        (2, ModuleFamily::Scalar { r: 3 }),
        (3, ModuleFamily::Scalar { r: 3 }),
        (3, ModuleFamily::Adjoint),
    ] {
        let ctx = Arc::new(AlgebraContext::new(n, family).unwrap());
        let chart = MetricChart::flat(n);
        let system = ClosedSystem::flat(ctx.clone(), chart.clone()).unwrap();
        let base = vec![0.1; n];
        let loops = rectangle_loops(&base, &[0.4, 0.8]);
        let (space, hols) =
            solution_space(&system, &loops, &Default::default(), &Default::default()).unwrap();
        let op = operator_for(family);
        let (ns, _) = collocation_with_margin(n, &op, &Default::default()).unwrap();
        assert_eq!(ns.dimension, space.dimension, "{}", family.label());
        assert_eq!(ns.dimension, module_dimension(family, n).unwrap());
        for k in 0..ns.dimension {
            let src = PolynomialSource {
                components: ns.polynomials(n, k).unwrap(),
            };
            let v = splitting_operator(&ctx, &chart, &src, &base).unwrap().value;
            let in_span = &v - &space.basis * (space.basis.transpose() * &v);
            assert!(in_span.amax() <= 1e-6 * v.amax().max(1.0));
            assert!(SolutionSpace::fixed_space_residual(&hols, &v) <= 1e-6);
        }
    }
}

#[test]
fn degenerate_sample_sets_are_rejected() {
    let opts = CollocationOptions {
        oversampling: 2,
        ..Default::default()
    };
    assert!(collocation_nullspace(2, &CollocationOperator::FlatScalar { r: 2 }, 2, &opts).is_err());
}

#[test]
fn sphere_oracle_matches_conformal_images() {
    let n = 3;
    let ns = collocation_nullspace(
        n,
        &CollocationOperator::SphereTracefreeHessian { radius: 1.0 },
        2,
        &Default::default(),
    )
    .unwrap();
    assert_eq!(ns.dimension, n + 2);
}
