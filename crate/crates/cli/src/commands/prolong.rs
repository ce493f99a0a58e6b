use nalgebra::DVector;
use serde_json::{json, Value};
use tractor_core::prolongation::{
    reconstruct_with, rectangle_loops, solution_space, GridTransport, TractorSection,
};

use super::{Outcome, Table};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::report::{float, to_value, vector, Report};

pub const REPORT: &str = "prolong.json";
pub const TABLE: &str = "residuals.csv";

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let system = cfg.system()?;
    let module = &system.ctx.module;
    let n = cfg.n();
    let base = cfg.basepoint();
    let loops = rectangle_loops(&base, &cfg.run.loop_sizes);
    let opts = cfg.transport_options();
    let (space, _) = solution_space(&system, &loops, &opts, &cfg.kernel_policy())?;
    let basis: Vec<DVector<f64>> = space.basis.column_iter().map(|c| c.into_owned()).collect();

    let mut failures = Vec::new();
    let mut report = Report::new("prolong", cfg);
    report
        .set("provenance", to_value(&system.provenance()))
        .set("n", n)
        .set("module", module.family.label())
        .set("dim_W", module.dim)
        .set("basepoint", to_value(&base))
        .set("loop_count", loops.len())
        .set("solution_dim", space.dimension)
        .set("attains_dim_W", space.dimension == module.dim)
        .set("holonomy_singular_values", to_value(&space.singular_values))
        .set("holonomy_defects", to_value(&space.holonomy_defects))
        .set("transport_error_estimate", space.max_error_estimate)
        .set("basis", Value::Array(basis.iter().map(vector).collect()));
    let norms = basis
        .iter()
        .map(|v| {
            Ok(to_value(
                &TractorSection::new(module, v.clone())?.component_norms(),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    report.set("basis_component_norms", Value::Array(norms));

    let mut tables = Vec::new();
    match &cfg.run.grid {
        None => {
            report.set("reconstruction", Value::Null);
        }
        Some(grid) => {
            let op = cfg.residual_operator()?;
            let gt = GridTransport::new(&system, &base, grid, &opts)?;
            let mut header: Vec<String> = vec!["solution".into()];
            header.extend((1..=n).map(|i| format!("x{i}")));
            header.push("residual".into());
            header.extend((0..=module.top()).map(|j| format!("norm_W{j}")));
            let mut rows = Vec::new();
            let mut per_solution = Vec::new();
            let mut worst = 0.0_f64;
            for (k, sigma0) in basis.iter().enumerate() {
                let rec = reconstruct_with(&system, &gt, sigma0, &op)?;
                for &(node, res) in &rec.residual.per_node {
                    let x = grid.node(&grid.unflatten(node));
                    let sec = TractorSection::new(module, rec.sections[node].clone())?;
                    let mut row = vec![k.to_string()];
                    row.extend(x.iter().map(|v| float(*v)));
                    row.push(float(res));
                    row.extend(sec.component_norms().iter().map(|v| float(*v)));
                    rows.push(row);
                }
                worst = worst.max(rec.max_residual());
                per_solution.push(json!({
                    "index": k,
                    "max_residual": rec.max_residual(),
                    "interior_nodes": rec.residual.per_node.len(),
                }));
            }
            let tol = cfg.run.tolerances.residual;
            if worst > tol {
                failures.push(format!("reconstruction residual {worst:e} exceeds {tol:e}"));
            }
            report.set(
                "reconstruction",
                json!({
                    "grid": to_value(grid),
                    "residual_operator": operator_name(&op),
                    "transport_error_estimate": gt.error_estimate,
                    "per_solution": per_solution,
                    "max_residual": worst,
                    "tolerance": tol,
                    "table": TABLE,
                }),
            );
            tables.push((TABLE.to_string(), Table { header, rows }));
        }
    }
    report.set("failures", to_value(&failures));
    let mut out = Outcome::new(vec![(REPORT.into(), report)], failures);
    out.tables = tables;
    Ok(out)
}

pub fn operator_name(op: &tractor_core::oracle::ResidualOperator) -> String {
    use tractor_core::oracle::ResidualOperator::*;
    match op {
        TracefreeHessian { a: None } => "tracefree_hessian".into(),
        TracefreeHessian { a: Some(_) } => "tracefree_hessian_plus_fA".into(),
        FlatTracefreeSymmetric { r } => format!("flat_tracefree_symmetric_r{r}"),
        ConformalKilling => "conformal_killing".into(),
    }
}
