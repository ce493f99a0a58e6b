use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tractor_core::algebra::{AlgebraContext, ModuleFamily};
use tractor_core::geometry::{
    einstein_residual_of_rescaling, LowerOrderTensor, MetricChart, ScalarSample,
};
use tractor_core::oracle::ResidualOperator;
use tractor_core::polynomial::{Polynomial, PolynomialSpace};
use tractor_core::prolongation::*;
use tractor_core::stencil::GridSpec;

fn ctx(n: usize, family: ModuleFamily) -> Arc<AlgebraContext> {
    Arc::new(AlgebraContext::new(n, family).unwrap())
}

fn sphere_system(n: usize) -> ClosedSystem {
    ClosedSystem::einstein(
        ctx(n, ModuleFamily::Scalar { r: 2 }),
        MetricChart::sphere(n, 1.0).unwrap(),
        LowerOrderTensor::zero(n),
    )
    .unwrap()
}

fn random_polynomial(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> Polynomial {
    let space = PolynomialSpace::new(n, degree);
    let c: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    space.polynomial(&c).unwrap()
}

fn sphere_solutions(n: usize) -> Vec<RationalSource> {
    let mut out = vec![RationalSource::sphere_weighted(
        vec![Polynomial::constant(n, 1.0)],
        1.0,
    )];
    for i in 0..n {
        out.push(RationalSource::sphere_weighted(
            vec![Polynomial::variable(n, i)],
            1.0,
        ));
    }
    out.push(RationalSource::sphere_weighted(
        vec![Polynomial::norm_squared(n)],
        1.0,
    ));
    out
}

#[test]
fn flat_transport_follows_splitting() {
    let n = 2;
    let c = ctx(n, ModuleFamily::Scalar { r: 2 });
    let chart = MetricChart::flat(n);
    let system = ClosedSystem::flat(c.clone(), chart.clone()).unwrap();
    let f = PolynomialSource::scalar(
        Polynomial::constant(n, 0.7)
            + Polynomial::variable(n, 0).scale(-1.2)
            + Polynomial::variable(n, 1).scale(0.4)
            + Polynomial::norm_squared(n).scale(2.0),
    );
    let (p, q) = (vec![0.1, -0.3], vec![0.8, 0.5]);
    let start = splitting_operator(&c, &chart, &f, &p).unwrap();
    let end = splitting_operator(&c, &chart, &f, &q).unwrap();
    let (v, _) = transport(&system, &start.value, &[p, q], &Default::default()).unwrap();
    assert!((v - end.value).amax() < 1e-9);
}

#[test]
fn sphere_calibration_transports_known_solutions() {
    let n = 3;
    let system = sphere_system(n);
    let (p, q) = (vec![0.2, -0.1, 0.3], vec![-0.9, 0.6, 0.4]);
    let t = transport_matrix(&system, &[p.clone(), q.clone()], &Default::default()).unwrap();
    for f in sphere_solutions(n) {
        let a = splitting_operator(&system.ctx, &system.chart, &f, &p).unwrap();
        let b = splitting_operator(&system.ctx, &system.chart, &f, &q).unwrap();
        let err = (&t.matrix * &a.value - &b.value).amax();
        assert!(err < 1e-8, "{err}");
    }
}

#[test]
fn splitting_defect_vanishes_for_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let configs: Vec<(MetricChart, ModuleFamily)> = vec![
        (MetricChart::flat(3), ModuleFamily::Scalar { r: 2 }),
        (MetricChart::flat(2), ModuleFamily::Scalar { r: 3 }),
        (MetricChart::flat(3), ModuleFamily::Adjoint),
        (
            MetricChart::sphere(3, 1.0).unwrap(),
            ModuleFamily::Scalar { r: 2 },
        ),
        (
            MetricChart::sphere(3, 1.0).unwrap(),
            ModuleFamily::Scalar { r: 3 },
        ),
        (MetricChart::sphere(3, 1.0).unwrap(), ModuleFamily::Adjoint),
    ];
    for (chart, family) in configs {
        let n = chart.n;
        let c = ctx(n, family);
        let mut worst = 0.0_f64;
        for _ in 0..4 {
            let f = PolynomialSource {
                components: (0..c.module.bottom_dim())
                    .map(|_| random_polynomial(&mut rng, n, 3))
                    .collect(),
            };
            for _ in 0..5 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let chk = splitting_with_defect(&c, &chart, &f, &x).unwrap();
                let expect = DVector::from_iterator(
                    f.components.len(),
                    f.components.iter().map(|p| p.eval(&x)),
                );
                assert!((chk.section.bottom() - expect).amax() < 1e-12);
                worst = worst.max(chk.defect_norm());
            }
        }
        assert!(
            worst < 1e-9,
            "{} on {:?}: {worst}",
            family.label(),
            chart.tag()
        );
    }
}

#[test]
fn jet_isomorphisms_below_order() {
    for (n, family) in [
        (3, ModuleFamily::Scalar { r: 2 }),
        (2, ModuleFamily::Scalar { r: 3 }),
        (3, ModuleFamily::Scalar { r: 3 }),
        (3, ModuleFamily::Adjoint),
    ] {
        let c = ctx(n, family);
        let r = family.r();
        for chart in [MetricChart::flat(n), MetricChart::sphere(n, 1.0).unwrap()] {
            for level in 0..r {
                let iso = jet_isomorphism_check(&c, &chart, level, &vec![0.3; n]).unwrap();
                assert!(
                    iso.is_isomorphism(),
                    "{} level {level}: {iso:?}",
                    family.label()
                );
            }
        }
    }
}

#[test]
fn splitting_is_unique_on_flat_model() {
    for (n, family) in [
        (3, ModuleFamily::Scalar { r: 2 }),
        (2, ModuleFamily::Scalar { r: 3 }),
        (3, ModuleFamily::Adjoint),
    ] {
        let chk = splitting_uniqueness_check(&ctx(n, family), 5).unwrap();
        assert!(chk.injective(), "{}: {chk:?}", family.label());
    }
}

#[test]
fn transport_is_linear() {
    let system = sphere_system(3);
    let path = vec![vec![0.0; 3], vec![0.4, 0.4, -0.2]];
    let opts = TransportOptions {
        estimate_error: false,
        ..Default::default()
    };
    let a = DVector::from_vec(vec![1.0, -0.5, 0.2, 0.0, 3.0]);
    let b = DVector::from_vec(vec![-0.3, 0.1, 0.9, 2.0, -1.0]);
    let (ta, _) = transport(&system, &a, &path, &opts).unwrap();
    let (tb, _) = transport(&system, &b, &path, &opts).unwrap();
    let (tab, _) = transport(&system, &(&a * 2.0 - &b * 0.7), &path, &opts).unwrap();
    assert!((tab - (ta * 2.0 - tb * 0.7)).amax() < 1e-10);
}

#[test]
fn path_outside_domain_is_rejected() {
    let system = ClosedSystem::einstein(
        ctx(3, ModuleFamily::Scalar { r: 2 }),
        MetricChart::hyperbolic(3, 1.0).unwrap(),
        LowerOrderTensor::zero(3),
    )
    .unwrap();
    let r = transport_matrix(
        &system,
        &[vec![0.0; 3], vec![0.95, 0.0, 0.0]],
        &Default::default(),
    );
    assert!(matches!(r, Err(tractor_core::Error::OutsideDomain { .. })));
}

#[test]
fn flat_solution_dimensions() {
    for (n, family, dim) in [
        (3, ModuleFamily::Scalar { r: 2 }, 5),
        (2, ModuleFamily::Scalar { r: 2 }, 4),
        (2, ModuleFamily::Scalar { r: 3 }, 9),
        (3, ModuleFamily::Adjoint, 10),
    ] {
        let system = ClosedSystem::flat(ctx(n, family), MetricChart::flat(n)).unwrap();
        let loops = rectangle_loops(&vec![0.0; n], &[0.4, 0.8]);
        let (space, _) =
            solution_space(&system, &loops, &Default::default(), &Default::default()).unwrap();
        assert_eq!(space.dimension, dim);
        assert!(space.holonomy_defects.iter().all(|d| *d < 1e-8));
    }
}

#[test]
fn sphere_holonomy_dimension_and_reconstruction() {
    let n = 3;
    let system = sphere_system(n);
    let base = vec![0.0; n];
    let loops = rectangle_loops(&base, &[0.4, 0.8]);
    let (space, hols) =
        solution_space(&system, &loops, &Default::default(), &Default::default()).unwrap();
    assert_eq!(space.dimension, 5);
    for f in sphere_solutions(n) {
        let v = splitting_operator(&system.ctx, &system.chart, &f, &base)
            .unwrap()
            .value;
        assert!(SolutionSpace::fixed_space_residual(&hols, &v) < 1e-8);
    }

    let grid = GridSpec {
        center: base.clone(),
        half_width: 0.1,
        points: 21,
    };
    let gt = GridTransport::new(&system, &base, &grid, &Default::default()).unwrap();
    assert!(gt.error_estimate < 1e-10);
    let op = ResidualOperator::TracefreeHessian { a: None };
    let mut einstein = Vec::new();
    for (k, f) in sphere_solutions(n).iter().enumerate() {
        let v = splitting_operator(&system.ctx, &system.chart, f, &base)
            .unwrap()
            .value;
        let sigma0 = &space.basis * (space.basis.transpose() * v);
        let rec = reconstruct_with(&system, &gt, &sigma0, &op).unwrap();
        assert!(
            rec.max_residual() < 1e-6,
            "solution {k}: {}",
            rec.max_residual()
        );
        let consistency = splitting_consistency(&system, &rec).unwrap();
        assert!(consistency < 1e-7, "solution {k}: {consistency}");
        // Einstein rescaling on the region where f is comfortably positive
        let field = &rec.bottom[0];
        let top = field.values.iter().fold(0.0_f64, |m, v| m.max(*v));
        if top <= 0.0 {
            continue;
        }
        let samples: Vec<ScalarSample> = grid
            .interior(2)
            .into_iter()
            .filter(|&i| field.values[i] > 0.3 * top)
            .map(|i| ScalarSample::from_grid(field, i).unwrap())
            .collect();
        if samples.len() > 100 {
            einstein.push(einstein_residual_of_rescaling(&system.chart, &samples, None).unwrap());
        }
    }
    assert!(einstein.len() >= 3);
    assert!(einstein.iter().all(|r| *r <= 1e-4), "{einstein:?}");
}

#[test]
fn generic_quartic_metric_has_fewer_solutions() {
    let n = 3;
    let phi = Polynomial::from_terms(
        n,
        [
            (vec![4, 0, 0], 0.8),
            (vec![1, 2, 1], -1.1),
            (vec![0, 3, 1], 0.6),
            (vec![2, 0, 2], 0.9),
            (vec![0, 1, 0], 0.3),
            (vec![1, 1, 0], -0.5),
        ],
    );
    let chart = MetricChart::conformal_poly(phi, 2.0).unwrap();
    let system = ClosedSystem::einstein(
        ctx(n, ModuleFamily::Scalar { r: 2 }),
        chart,
        LowerOrderTensor::zero(n),
    )
    .unwrap();
    let loops = rectangle_loops(&[0.0; 3], &[0.4, 0.8]);
    let (space, _) =
        solution_space(&system, &loops, &Default::default(), &Default::default()).unwrap();
    assert!(space.dimension < n + 2, "{:?}", space.singular_values);
    // the constant function always survives when A = 0
    assert_eq!(space.dimension, 1);
}

#[test]
fn flat_third_order_reconstruction() {
    let n = 2;
    let system =
        ClosedSystem::flat(ctx(n, ModuleFamily::Scalar { r: 3 }), MetricChart::flat(n)).unwrap();
    let base = vec![0.0; n];
    let grid = GridSpec {
        center: vec![0.1, -0.1],
        half_width: 0.5,
        points: 21,
    };
    let gt = GridTransport::new(&system, &base, &grid, &Default::default()).unwrap();
    let op = ResidualOperator::FlatTracefreeSymmetric { r: 3 };
    for k in 0..9 {
        let mut v = DVector::zeros(9);
        v[k] = 1.0;
        let rec = reconstruct_with(&system, &gt, &v, &op).unwrap();
        assert!(rec.max_residual() < 1e-6, "{k}: {}", rec.max_residual());
        let consistency = splitting_consistency(&system, &rec).unwrap();
        assert!(consistency < 1e-7, "{k}: {consistency}");
    }
}

#[test]
fn flat_norm_squared_reconstruction() {
    let n = 3;
    let c = ctx(n, ModuleFamily::Scalar { r: 2 });
    let system = ClosedSystem::flat(c.clone(), MetricChart::flat(n)).unwrap();
    let f = PolynomialSource::scalar(Polynomial::norm_squared(n));
    let v = splitting_operator(&c, &system.chart, &f, &[0.0; 3])
        .unwrap()
        .value;
    assert_eq!(v.as_slice(), &[-2.0, 0.0, 0.0, 0.0, 0.0]);
    let grid = GridSpec {
        center: vec![0.0; 3],
        half_width: 0.3,
        points: 9,
    };
    let rec = reconstruct_and_check(
        &system,
        &[0.0; 3],
        &v,
        &grid,
        &ResidualOperator::TracefreeHessian { a: None },
        &Default::default(),
    )
    .unwrap();
    assert!(rec.max_residual() < 1e-7);
    for (x, val) in grid.nodes().iter().zip(&rec.bottom[0].values) {
        assert!((val - x.iter().map(|t| t * t).sum::<f64>()).abs() < 1e-8);
    }
}

#[test]
fn adjoint_reconstruction_gives_conformal_killing_fields() {
    let n = 3;
    let system = ClosedSystem::flat(ctx(n, ModuleFamily::Adjoint), MetricChart::flat(n)).unwrap();
    let grid = GridSpec {
        center: vec![0.0; 3],
        half_width: 0.3,
        points: 9,
    };
    let gt = GridTransport::new(&system, &[0.0; 3], &grid, &Default::default()).unwrap();
    for k in 0..10 {
        let mut v = DVector::zeros(10);
        v[k] = 1.0;
        let rec = reconstruct_with(&system, &gt, &v, &ResidualOperator::ConformalKilling).unwrap();
        assert!(rec.max_residual() < 1e-9, "{k}: {}", rec.max_residual());
    }
}

#[test]
fn curvature_of_modified_connection_is_riemann_action() {
    let chart = MetricChart::sphere(3, 1.0).unwrap();
    for family in [ModuleFamily::Scalar { r: 2 }, ModuleFamily::Adjoint] {
        let d =
            modified_connection_curvature_defect(ctx(3, family), &chart, &[0.3, -0.2, 0.5], 1e-3)
                .unwrap();
        assert!(d < 1e-8, "{d}");
    }
}
