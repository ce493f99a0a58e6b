//! From an initial value at the basepoint back to a solution `f` on a grid.

use nalgebra::{DMatrix, DVector};

use super::section::TractorSection;
use super::splitting::{splitting_operator, GridSource};
use super::system::ClosedSystem;
use super::transport::{integrate_segment, transport_matrix, TransportOptions};
use crate::oracle::{fd_residual, FdResidual, ResidualOperator};
use crate::stencil::{stencil_reach, GridField, GridSpec};
use crate::{Error, Result};

/// Transport matrices from the basepoint to every grid node along straight
/// segments.
#[derive(Debug, Clone)]
pub struct GridTransport {
    pub grid: GridSpec,
    pub basepoint: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
    /// Step-halving estimate on the longest segment.
    pub error_estimate: f64,
}

impl GridTransport {
    pub fn new(
        system: &ClosedSystem,
        basepoint: &[f64],
        grid: &GridSpec,
        opts: &TransportOptions,
    ) -> Result<Self> {
        grid.validate()?;
        if grid.dim() != system.n() || basepoint.len() != system.n() {
            return Err(Error::InvalidArgument(
                "grid, basepoint and chart dimensions differ".into(),
            ));
        }
        system.chart.check_domain(basepoint)?;
        let nodes = grid.nodes();
        for x in &nodes {
            system.chart.check_domain(x)?;
        }
        let mut matrices = Vec::with_capacity(nodes.len());
        let mut far = (0.0, 0);
        for (k, x) in nodes.iter().enumerate() {
            let d: f64 = x.iter().zip(basepoint).map(|(a, b)| (a - b).powi(2)).sum();
            if d > far.0 {
                far = (d, k);
            }
            matrices.push(integrate_segment(system, basepoint, x, opts.step)?);
        }
        let error_estimate = if opts.estimate_error && far.0 > 0.0 {
            transport_matrix(system, &[basepoint.to_vec(), nodes[far.1].clone()], opts)?
                .error_estimate
        } else {
            0.0
        };
        Ok(GridTransport {
            grid: grid.clone(),
            basepoint: basepoint.to_vec(),
            matrices,
            error_estimate,
        })
    }

    /// `Σ` at every node for one initial value.
    pub fn sections(&self, sigma0: &DVector<f64>) -> Vec<DVector<f64>> {
        self.matrices.iter().map(|m| m * sigma0).collect()
    }
}

/// A reconstructed solution and its residual.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub sections: Vec<DVector<f64>>,
    /// Frame components of `f = Σ₀` on the grid.
    pub bottom: Vec<GridField>,
    pub residual: FdResidual,
}

impl Reconstruction {
    pub fn max_residual(&self) -> f64 {
        self.residual.max
    }
}

/// Transports `sigma0`, extracts `f = Σ₀` and evaluates `D(f)` by finite
/// differences.
pub fn reconstruct_with(
    system: &ClosedSystem,
    transport: &GridTransport,
    sigma0: &DVector<f64>,
    op: &ResidualOperator,
) -> Result<Reconstruction> {
    if sigma0.len() != system.dim() {
        return Err(Error::InvalidArgument(
            "initial value has the wrong dimension".into(),
        ));
    }
    let module = &system.ctx.module;
    let sections = transport.sections(sigma0);
    let bottom: Vec<GridField> = module
        .bottom()
        .indices
        .iter()
        .map(|&i| GridField {
            spec: transport.grid.clone(),
            values: sections.iter().map(|s| s[i]).collect(),
        })
        .collect();
    let residual = fd_residual(&system.chart, &bottom, op)?;
    Ok(Reconstruction {
        sections,
        bottom,
        residual,
    })
}

pub fn reconstruct_and_check(
    system: &ClosedSystem,
    basepoint: &[f64],
    sigma0: &DVector<f64>,
    grid: &GridSpec,
    op: &ResidualOperator,
    opts: &TransportOptions,
) -> Result<Reconstruction> {
    let t = GridTransport::new(system, basepoint, grid, opts)?;
    reconstruct_with(system, &t, sigma0, op)
}

/// `max |L(f)(x) − Σ(x)|` over nodes where the stencils for `N` derivatives
/// fit, with `f` the reconstructed bottom component.
pub fn splitting_consistency(system: &ClosedSystem, rec: &Reconstruction) -> Result<f64> {
    let ctx = &system.ctx;
    let spec = &rec.bottom[0].spec;
    let top = ctx.module.top();
    // mixed partials use one axis stencil per direction
    let margin = (0..=top).map(stencil_reach).max().unwrap_or(0);
    let mut worst = 0.0_f64;
    for node in spec.interior(margin) {
        let x = spec.node(&spec.unflatten(node));
        let src = GridSource {
            fields: &rec.bottom,
            node,
        };
        let l: TractorSection = splitting_operator(ctx, &system.chart, &src, &x)?;
        worst = worst.max((&l.value - &rec.sections[node]).amax());
    }
    Ok(worst)
}
