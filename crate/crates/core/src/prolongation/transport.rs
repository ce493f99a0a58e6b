//! Parallel transport for closed systems, holonomy around loops and the
//! resulting solution spaces.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::system::ClosedSystem;
use crate::linalg::{vstack, FullSvd};
use crate::{Error, Result};

/// Fixed-step integrator settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransportOptions {
    /// Nominal step length along the path.
    pub step: f64,
    /// Also integrate with half the step and report the difference.
    pub estimate_error: bool,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            step: 1e-3,
            estimate_error: true,
        }
    }
}

/// Most steps a single segment may take before the step is deemed to have
/// underflowed.
const MAX_STEPS_PER_SEGMENT: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Transport {
    /// `Σ(end) = matrix · Σ(start)`.
    pub matrix: DMatrix<f64>,
    /// `max|Φ_h − Φ_{h/2}|`, zero when not requested.
    pub error_estimate: f64,
    pub steps: usize,
}

/// Straight segments through the listed chart points.
pub type Path = Vec<Vec<f64>>;

fn check_path(system: &ClosedSystem, path: &[Vec<f64>]) -> Result<()> {
    if path.is_empty() || path.iter().any(|p| p.len() != system.n()) {
        return Err(Error::InvalidArgument(format!(
            "path points must have {} coordinates",
            system.n()
        )));
    }
    // The catalog domains are balls, so segments stay inside when their
    // endpoints do.
    for p in path {
        system.chart.check_domain(p)?;
    }
    Ok(())
}

/// `−Σ_a v^a M_a(x)`.
fn generator(system: &ClosedSystem, x: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
    let ms = system.connection_matrices(x)?;
    let mut g = DMatrix::zeros(system.dim(), system.dim());
    for (m, &c) in ms.iter().zip(v) {
        if c != 0.0 {
            g -= m * c;
        }
    }
    Ok(g)
}

fn integrate(system: &ClosedSystem, path: &[Vec<f64>], step: f64) -> Result<(DMatrix<f64>, usize)> {
    let dim = system.dim();
    let mut phi = DMatrix::identity(dim, dim);
    let mut total = 0;
    for seg in path.windows(2) {
        let (m, steps) = segment(system, &seg[0], &seg[1], step)?;
        phi = m * phi;
        total += steps;
    }
    Ok((phi, total))
}

/// Transport matrix along the straight segment `p → q`, without an error
/// estimate. The endpoints are not domain-checked here.
pub(crate) fn integrate_segment(
    system: &ClosedSystem,
    p: &[f64],
    q: &[f64],
    step: f64,
) -> Result<DMatrix<f64>> {
    Ok(segment(system, p, q, step)?.0)
}

fn segment(
    system: &ClosedSystem,
    p: &[f64],
    q: &[f64],
    step: f64,
) -> Result<(DMatrix<f64>, usize)> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::StepUnderflow { step, length: 0.0 });
    }
    let dim = system.dim();
    let mut phi = DMatrix::identity(dim, dim);
    let delta: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let length = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    if length == 0.0 {
        return Ok((phi, 0));
    }
    let raw = (length / step).ceil();
    if raw > MAX_STEPS_PER_SEGMENT {
        return Err(Error::StepUnderflow { step, length });
    }
    let steps = (raw as usize).max(1);
    let h = 1.0 / steps as f64;
    let at = |t: f64| -> Vec<f64> { p.iter().zip(&delta).map(|(a, d)| a + t * d).collect() };
    // parameter t ∈ [0, 1], velocity = delta
    let mut g0 = generator(system, &at(0.0), &delta)?;
    for k in 0..steps {
        let t = k as f64 * h;
        let gm = generator(system, &at(t + 0.5 * h), &delta)?;
        let t1 = if k + 1 == steps { 1.0 } else { t + h };
        let g1 = generator(system, &at(t1), &delta)?;
        let k1 = &g0 * &phi;
        let k2 = &gm * (&phi + &k1 * (0.5 * h));
        let k3 = &gm * (&phi + &k2 * (0.5 * h));
        let k4 = &g1 * (&phi + &k3 * h);
        phi += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        g0 = g1;
    }
    Ok((phi, steps))
}

/// Transport matrix along a polyline.
pub fn transport_matrix(
    system: &ClosedSystem,
    path: &[Vec<f64>],
    opts: &TransportOptions,
) -> Result<Transport> {
    check_path(system, path)?;
    let (matrix, steps) = integrate(system, path, opts.step)?;
    let error_estimate = if opts.estimate_error {
        let (fine, _) = integrate(system, path, 0.5 * opts.step)?;
        (&fine - &matrix).amax()
    } else {
        0.0
    };
    Ok(Transport {
        matrix,
        error_estimate,
        steps,
    })
}

/// Transports a single value.
pub fn transport(
    system: &ClosedSystem,
    sigma0: &DVector<f64>,
    path: &[Vec<f64>],
    opts: &TransportOptions,
) -> Result<(DVector<f64>, f64)> {
    if sigma0.len() != system.dim() {
        return Err(Error::InvalidArgument(
            "initial value has the wrong dimension".into(),
        ));
    }
    let t = transport_matrix(system, path, opts)?;
    Ok((&t.matrix * sigma0, t.error_estimate))
}

/// Transport around a closed loop.
pub fn holonomy(
    system: &ClosedSystem,
    lp: &[Vec<f64>],
    opts: &TransportOptions,
) -> Result<Transport> {
    let (first, last) = (lp.first(), lp.last());
    if first.is_none() || first != last {
        return Err(Error::InvalidArgument(
            "a loop must end where it starts".into(),
        ));
    }
    transport_matrix(system, lp, opts)
}

/// Coordinate-plane rectangles through `base` with the given side lengths,
/// one loop per axis pair and per pair of sides.
pub fn rectangle_loops(base: &[f64], sides: &[f64]) -> Vec<Path> {
    let n = base.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for &s in sides {
                for &t in sides {
                    let mut p1 = base.to_vec();
                    p1[i] += s;
                    let mut p2 = p1.clone();
                    p2[j] += t;
                    let mut p3 = base.to_vec();
                    p3[j] += t;
                    out.push(vec![base.to_vec(), p1, p2, p3, base.to_vec()]);
                }
            }
        }
    }
    out
}

/// Thresholds for extracting `∩ ker(H − I)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelPolicy {
    /// Singular values at or below this are treated as zero.
    pub threshold: f64,
    /// Singular values in this closed band make the decision unreliable.
    pub ambiguous: (f64, f64),
}

impl Default for KernelPolicy {
    fn default() -> Self {
        KernelPolicy {
            threshold: 1e-6,
            ambiguous: (1e-8, 1e-4),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionSpace {
    pub dimension: usize,
    /// Orthonormal initial values at the basepoint, as columns.
    pub basis: DMatrix<f64>,
    /// Singular values of the stacked `H_k − I`, descending.
    pub singular_values: Vec<f64>,
    /// `max|H_k − I|` per loop.
    pub holonomy_defects: Vec<f64>,
    pub max_error_estimate: f64,
}

impl SolutionSpace {
    /// `max |(H_k − I)v|` over basis vectors and loops, recomputed from the
    /// stored holonomies; also usable for other candidate vectors.
    pub fn fixed_space_residual(holonomies: &[DMatrix<f64>], v: &DVector<f64>) -> f64 {
        holonomies
            .iter()
            .map(|h| (h * v - v).amax())
            .fold(0.0, f64::max)
    }
}

/// Joint fixed space of the holonomies of `loops`, all based at the same
/// point.
pub fn solution_space(
    system: &ClosedSystem,
    loops: &[Path],
    opts: &TransportOptions,
    policy: &KernelPolicy,
) -> Result<(SolutionSpace, Vec<DMatrix<f64>>)> {
    if loops.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one loop is required".into(),
        ));
    }
    let base = &loops[0][0];
    if loops.iter().any(|l| &l[0] != base) {
        return Err(Error::InvalidArgument(
            "all loops must share the basepoint".into(),
        ));
    }
    let dim = system.dim();
    let id = DMatrix::<f64>::identity(dim, dim);
    let mut hols = Vec::with_capacity(loops.len());
    let mut defects = Vec::with_capacity(loops.len());
    let mut max_err = 0.0_f64;
    for l in loops {
        let t = holonomy(system, l, opts)?;
        max_err = max_err.max(t.error_estimate);
        defects.push((&t.matrix - &id).amax());
        hols.push(t.matrix);
    }
    let blocks: Vec<DMatrix<f64>> = hols.iter().map(|h| h - &id).collect();
    let stacked = vstack(&blocks.iter().collect::<Vec<_>>());
    let svd = FullSvd::new(&stacked);
    let sv = svd.singular_values.clone();
    let (lo, hi) = policy.ambiguous;
    if sv.iter().any(|&s| s >= lo && s <= hi) {
        return Err(Error::IllConditioned {
            singular_values: sv,
        });
    }
    let rank = sv.iter().filter(|&&s| s > policy.threshold).count();
    let basis = svd.v.columns(rank, dim - rank).into_owned();
    Ok((
        SolutionSpace {
            dimension: dim - rank,
            basis,
            singular_values: sv,
            holonomy_defects: defects,
            max_error_estimate: max_err,
        },
        hols,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraContext, ModuleFamily};
    use crate::geometry::MetricChart;
    use std::sync::Arc;

    fn flat_standard(n: usize) -> ClosedSystem {
        let ctx = Arc::new(AlgebraContext::new(n, ModuleFamily::Scalar { r: 2 }).unwrap());
        ClosedSystem::flat(ctx, MetricChart::flat(n)).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let s = flat_standard(2);
        let (v, _) = transport(
            &s,
            &DVector::zeros(4),
            &[vec![0.0, 0.0], vec![0.3, 0.4]],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(v.amax(), 0.0);
    }

    #[test]
    fn flat_holonomy_is_identity() {
        let s = flat_standard(3);
        let loops = rectangle_loops(&[0.0; 3], &[0.4, 0.8]);
        assert_eq!(loops.len(), 12);
        let (space, _) =
            solution_space(&s, &loops, &Default::default(), &Default::default()).unwrap();
        assert_eq!(space.dimension, 5);
        assert!(space.holonomy_defects.iter().all(|d| *d < 1e-8));
    }

    #[test]
    fn reversed_path_inverts() {
        let ctx = Arc::new(AlgebraContext::new(3, ModuleFamily::Scalar { r: 2 }).unwrap());
        let s = ClosedSystem::einstein(
            ctx,
            MetricChart::sphere(3, 1.0).unwrap(),
            crate::geometry::LowerOrderTensor::zero(3),
        )
        .unwrap();
        let path = vec![
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.2, -0.1],
            vec![0.7, -0.3, 0.4],
        ];
        let mut back = path.clone();
        back.reverse();
        let opts = TransportOptions::default();
        let f = transport_matrix(&s, &path, &opts).unwrap();
        let b = transport_matrix(&s, &back, &opts).unwrap();
        let prod = &b.matrix * &f.matrix;
        assert!((prod - DMatrix::identity(5, 5)).amax() < 1e-8);
        assert!(f.error_estimate < 1e-10);
    }

    #[test]
    fn bad_steps_are_reported() {
        let s = flat_standard(2);
        let opts = TransportOptions {
            step: 1e-12,
            estimate_error: false,
        };
        let r = transport_matrix(&s, &[vec![0.0, 0.0], vec![1.0, 0.0]], &opts);
        assert!(matches!(r, Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn open_loop_rejected() {
        let s = flat_standard(2);
        assert!(holonomy(&s, &[vec![0.0, 0.0], vec![1.0, 0.0]], &Default::default()).is_err());
    }
}
