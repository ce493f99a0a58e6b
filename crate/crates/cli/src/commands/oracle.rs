use serde_json::Value;
use tractor_core::algebra::module_dimension;
use tractor_core::oracle::{collocation_with_margin, CollocationOperator, Nullspace};
use tractor_core::polynomial::PolynomialSpace;

use super::Outcome;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::report::{to_value, Report};

pub const REPORT: &str = "oracle.json";

pub fn operator(cfg: &RunConfig) -> CliResult<CollocationOperator> {
    cfg.oracle_operator().ok_or_else(|| {
        CliError::Config(
            "no collocation oracle for this configuration (flat charts, or the sphere with scalar r=2 and no A)"
                .into(),
        )
    })
}

/// Collocation at the natural degree and one above.
pub fn nullspaces(cfg: &RunConfig) -> CliResult<(CollocationOperator, Nullspace, Nullspace)> {
    let op = operator(cfg)?;
    let (ns, above) = collocation_with_margin(cfg.n(), &op, &cfg.collocation_options())?;
    Ok((op, ns, above))
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let n = cfg.n();
    let (op, ns, above) = nullspaces(cfg)?;
    let dim_w = module_dimension(cfg.module, n)?;
    let exponents = PolynomialSpace::new(n, ns.degree).exponents().to_vec();
    let mut report = Report::new("oracle", cfg);
    report
        .set("operator", to_value(&op))
        .set("collocation_options", to_value(&cfg.collocation_options()))
        .set("degree", ns.degree)
        .set("dimension", ns.dimension)
        .set("dimension_at_next_degree", above.dimension)
        .set("dim_W", dim_w)
        .set("matches_dim_W", ns.dimension == dim_w)
        .set("singular_values", to_value(&ns.singular_values))
        .set("monomial_exponents", to_value(&exponents))
        .set("basis_coefficients", to_value(&ns.basis_coefficients))
        .set("failures", Value::Array(Vec::new()));
    Ok(Outcome::new(vec![(REPORT.into(), report)], Vec::new()))
}
