use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};
use tractor_core::geometry::{einstein_residual_of_rescaling, ScalarSample};
use tractor_core::linalg::rank;
use tractor_core::oracle::CollocationOperator;
use tractor_core::prolongation::{
    reconstruct_with, splitting_operator, GridTransport, PolynomialSource, RationalSource,
};
use tractor_core::stencil::GridField;

use super::{oracle, prolong, Outcome};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::report::{to_value, Report};

pub const REPORT: &str = "verify.json";

struct PriorRun {
    basepoint: Vec<f64>,
    basis: DMatrix<f64>,
}

fn load_prior(cfg: &RunConfig, run_dir: &Path) -> CliResult<PriorRun> {
    let path = run_dir.join(prolong::REPORT);
    if !path.is_file() {
        return Err(CliError::MissingArtifact(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let malformed = |what: &str| CliError::Config(format!("{}: malformed {what}", path.display()));
    if v.get("config") != Some(&to_value(cfg)) {
        return Err(CliError::Config(format!(
            "{} was produced with a different configuration",
            path.display()
        )));
    }
    let floats =
        |x: &Value| -> Option<Vec<f64>> { x.as_array()?.iter().map(Value::as_f64).collect() };
    let basepoint = v
        .get("basepoint")
        .and_then(floats)
        .ok_or_else(|| malformed("basepoint"))?;
    let rows = v
        .get("basis")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("basis"))?
        .iter()
        .map(floats)
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| malformed("basis"))?;
    let dim = cfg.context()?.module.dim;
    if rows.iter().any(|r| r.len() != dim) {
        return Err(malformed("basis"));
    }
    let basis = DMatrix::from_fn(dim, rows.len(), |i, j| rows[j][i]);
    Ok(PriorRun { basepoint, basis })
}

pub fn run(cfg: &RunConfig, run_dir: &Path) -> CliResult<Outcome> {
    let prior = load_prior(cfg, run_dir)?;
    let system = cfg.system()?;
    let ctx = &system.ctx;
    let n = cfg.n();
    let tol = &cfg.run.tolerances;
    let base = prior.basepoint.clone();
    let solution_dim = prior.basis.ncols();
    let mut failures = Vec::new();
    let mut report = Report::new("verify", cfg);
    report.set("solution_dim", solution_dim);

    // oracle solutions as initial values at the basepoint
    let mut oracle_values: Option<Vec<DVector<f64>>> = None;
    match cfg.oracle_operator() {
        None => {
            report
                .set("oracle", Value::Null)
                .set("dims_match", Value::Null);
        }
        Some(_) => {
            let (op, ns, _) = oracle::nullspaces(cfg)?;
            let mut values = Vec::with_capacity(ns.dimension);
            for k in 0..ns.dimension {
                let polys = ns.polynomials(n, k)?;
                let v = match op {
                    CollocationOperator::SphereTracefreeHessian { radius } => splitting_operator(
                        ctx,
                        &system.chart,
                        &RationalSource::sphere_weighted(polys, radius),
                        &base,
                    )?,
                    _ => splitting_operator(
                        ctx,
                        &system.chart,
                        &PolynomialSource { components: polys },
                        &base,
                    )?,
                };
                values.push(v.value);
            }
            let mut residual = 0.0_f64;
            for v in &values {
                let off = v - &prior.basis * (prior.basis.transpose() * v);
                residual = residual.max(off.amax() / v.amax().max(1.0));
            }
            let dims_match = ns.dimension == solution_dim;
            let subspace_match = residual <= tol.subspace;
            if !dims_match {
                failures.push(format!(
                    "prolongation dimension {solution_dim} differs from oracle dimension {}",
                    ns.dimension
                ));
            }
            if !subspace_match {
                failures.push(format!(
                    "oracle solutions leave the holonomy span by {residual:e}"
                ));
            }
            report
                .set(
                    "oracle",
                    json!({
                        "operator": to_value(&op),
                        "degree": ns.degree,
                        "dimension": ns.dimension,
                    }),
                )
                .set("dims_match", dims_match)
                .set("subspace_residual", residual)
                .set("subspace_match", subspace_match);
            oracle_values = Some(values);
        }
    }

    if cfg.run.einstein_check {
        let grid = cfg.run.grid.as_ref().expect("validated");
        let candidates: Vec<DVector<f64>> = match oracle_values {
            Some(vs) => vs
                .iter()
                .map(|v| &prior.basis * (prior.basis.transpose() * v))
                .collect(),
            None => prior.basis.column_iter().map(|c| c.into_owned()).collect(),
        };
        let op = cfg.residual_operator()?;
        let margin = op.margin();
        let gt = GridTransport::new(&system, &base, grid, &cfg.transport_options())?;
        let frac = cfg.run.einstein_fraction;
        let mut checked = Vec::new();
        let mut per_solution = Vec::new();
        let mut worst = 0.0_f64;
        for (k, sigma0) in candidates.iter().enumerate() {
            let rec = reconstruct_with(&system, &gt, sigma0, &op)?;
            let f = &rec.bottom[0];
            let interior = grid.interior(margin);
            let hi = interior
                .iter()
                .fold(f64::NEG_INFINITY, |m, &i| m.max(f.values[i]));
            let lo = interior
                .iter()
                .fold(f64::INFINITY, |m, &i| m.min(f.values[i]));
            // the equation is linear, so −f is a solution as well
            let sign = if hi >= -lo { 1.0 } else { -1.0 };
            let top = hi.max(-lo);
            if !(top > 0.0) {
                continue;
            }
            let field = GridField {
                spec: f.spec.clone(),
                values: f.values.iter().map(|v| sign * v).collect(),
            };
            let samples = interior
                .iter()
                .filter(|&&i| field.values[i] > frac * top)
                .map(|&i| ScalarSample::from_grid(&field, i))
                .collect::<Result<Vec<_>, _>>()?;
            if samples.is_empty() {
                continue;
            }
            let r = einstein_residual_of_rescaling(&system.chart, &samples, Some(frac * top))?;
            worst = worst.max(r);
            checked.push(sigma0.clone());
            per_solution.push(json!({"index": k, "samples": samples.len(), "residual": r}));
        }
        let independent = if checked.is_empty() {
            0
        } else {
            rank(&DMatrix::from_columns(&checked))
        };
        if checked.is_empty() {
            failures.push("no solution is positive on any part of the grid".into());
        } else if worst > tol.einstein {
            failures.push(format!(
                "Einstein residual {worst:e} exceeds {:e}",
                tol.einstein
            ));
        }
        report
            .set("einstein_residual_max", worst)
            .set("einstein_solutions_checked", checked.len())
            .set("einstein_independent_solutions", independent)
            .set("einstein_per_solution", Value::Array(per_solution));
    } else {
        report.set("einstein_residual_max", Value::Null);
    }
    report
        .set("passed", failures.is_empty())
        .set("failures", to_value(&failures));
    Ok(Outcome::new(vec![(REPORT.into(), report)], failures))
}
