//! Run configuration: JSON schema, environment overrides and validation.
//!
//! See `docs/config.md` for the field reference.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tractor_core::algebra::{AlgebraContext, ModuleFamily};
use tractor_core::geometry::{LowerOrderTensor, MetricChart};
use tractor_core::oracle::{CollocationOperator, CollocationOptions, ResidualOperator};
use tractor_core::polynomial::DensePolynomial;
use tractor_core::prolongation::{ClosedSystem, KernelPolicy, TransportOptions};
use tractor_core::stencil::GridSpec;

use crate::error::{CliError, CliResult};

/// Prefix of the environment variables that override tolerances, e.g.
/// `TRACTOR_TOL_KERNEL=1e-7`.
pub const ENV_PREFIX: &str = "TRACTOR_TOL_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algebra: AlgebraConfig,
    pub module: ModuleFamily,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub lower_order: Option<LowerOrderConfig>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    #[default]
    Flat,
    ConformalPoly,
    Sphere,
    Hyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub family: MetricName,
    #[serde(default)]
    pub params: MetricParams,
    /// Radius of the admissible ball; family default when absent.
    #[serde(default)]
    pub domain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MetricParams {
    #[serde(default)]
    pub radius: Option<f64>,
    /// Conformal factor for `conformal_poly`.
    #[serde(default)]
    pub phi: Option<DensePolynomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerOrderConfig {
    /// Upper triangle of `A_ab`, row by row: `A_11, A_12, …, A_1n, A_22, …`.
    pub components: Vec<DensePolynomial>,
    /// Remove the trace instead of rejecting a tensor that has one.
    #[serde(default = "yes")]
    pub project: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Basepoint of all paths; the origin when absent.
    pub basepoint: Option<Vec<f64>>,
    /// Edge lengths of the rectangular holonomy loops.
    pub loop_sizes: Vec<f64>,
    /// Reconstruction grid; no reconstruction when absent.
    pub grid: Option<GridSpec>,
    pub step: f64,
    pub estimate_error: bool,
    /// Run the Einstein rescaling check in `verify`.
    pub einstein_check: bool,
    /// Rescaling samples are taken where `f > einstein_fraction · max f`.
    pub einstein_fraction: f64,
    pub tolerances: Tolerances,
    pub oracle: OracleConfig,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            basepoint: None,
            loop_sizes: vec![0.4, 0.8],
            grid: None,
            step: 1e-3,
            estimate_error: true,
            einstein_check: false,
            einstein_fraction: 0.3,
            tolerances: Tolerances::default(),
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Holonomy singular values at or below this count as zero.
    pub kernel: f64,
    /// Singular values in `[ambiguous_low, ambiguous_high]` abort the run.
    pub ambiguous_low: f64,
    pub ambiguous_high: f64,
    pub collocation_relative: f64,
    pub collocation_gap: f64,
    /// Largest accepted `|D(f)|` on the reconstruction grid.
    pub residual: f64,
    /// Largest accepted distance of an oracle solution from the holonomy span.
    pub subspace: f64,
    /// Largest accepted `|Ric⁰(f⁻²g)|`.
    pub einstein: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kernel: 1e-6,
            ambiguous_low: 1e-8,
            ambiguous_high: 1e-4,
            collocation_relative: 1e-8,
            collocation_gap: 10.0,
            residual: 1e-6,
            subspace: 1e-6,
            einstein: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub seed: u64,
    pub oversampling: usize,
    pub sample_box: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let d = CollocationOptions::default();
        OracleConfig {
            seed: d.seed,
            oversampling: d.oversampling,
            sample_box: d.sample_box,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Used when no `--out` is given on the command line.
    pub directory: Option<String>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: None,
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl RunConfig {
    /// Reads, applies environment overrides and validates.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, |k| std::env::var(k).ok())
    }

    pub fn from_json(text: &str, env: impl Fn(&str) -> Option<String>) -> CliResult<Self> {
        let mut cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.run.tolerances = apply_overrides(&cfg.run.tolerances, env)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.algebra.n
    }

    pub fn basepoint(&self) -> Vec<f64> {
        self.run
            .basepoint
            .clone()
            .unwrap_or_else(|| vec![0.0; self.n()])
    }

    pub fn validate(&self) -> CliResult<()> {
        let n = self.n();
        let bad = |m: String| Err(CliError::Config(m));
        if n < 2 {
            return bad(format!("algebra.n must be at least 2, got {n}"));
        }
        match self.module {
            ModuleFamily::Scalar { r } if r == 0 => {
                return bad("module.r must be at least 1".into())
            }
            ModuleFamily::Adjoint if n < 3 => return bad("the adjoint module needs n ≥ 3".into()),
            _ => {}
        }
        let standard = self.module == ModuleFamily::Scalar { r: 2 };
        let p = &self.metric.params;
        match self.metric.family {
            MetricName::Flat => {
                if p.radius.is_some() || p.phi.is_some() {
                    return bad("the flat metric takes no params".into());
                }
            }
            MetricName::Sphere | MetricName::Hyperbolic => {
                if p.phi.is_some() {
                    return bad("metric.params.phi belongs to conformal_poly".into());
                }
                match p.radius {
                    Some(r) if r.is_finite() && r > 0.0 => {}
                    _ => return bad("metric.params.radius must be a positive number".into()),
                }
            }
            MetricName::ConformalPoly => {
                if p.radius.is_some() {
                    return bad("conformal_poly takes metric.params.phi, not a radius".into());
                }
                if p.phi.is_none() {
                    return bad("conformal_poly needs metric.params.phi".into());
                }
                if self.metric.domain.is_none() {
                    return bad("conformal_poly needs metric.domain".into());
                }
            }
        }
        if let Some(d) = self.metric.domain {
            if !(d.is_finite() && d > 0.0) {
                return bad("metric.domain must be positive".into());
            }
        }
        if self.metric.family != MetricName::Flat && !standard {
            return bad(format!(
                "curved metrics need module scalar r=2, got {}",
                self.module.label()
            ));
        }
        if let Some(lo) = &self.lower_order {
            if !standard {
                return bad("lower_order needs module scalar r=2".into());
            }
            if lo.components.len() != n * (n + 1) / 2 {
                return bad(format!(
                    "lower_order.components needs {} entries (upper triangle), got {}",
                    n * (n + 1) / 2,
                    lo.components.len()
                ));
            }
            if self.run.einstein_check {
                return bad("einstein_check is only defined for A = 0".into());
            }
        }
        let run = &self.run;
        if run.basepoint.as_ref().is_some_and(|b| b.len() != n) {
            return bad("run.basepoint has the wrong length".into());
        }
        if run.loop_sizes.is_empty() || run.loop_sizes.iter().any(|s| !(s.is_finite() && *s > 0.0))
        {
            return bad("run.loop_sizes must be a non-empty list of positive lengths".into());
        }
        if let Some(g) = &run.grid {
            if g.center.len() != n {
                return bad("run.grid.center has the wrong length".into());
            }
            g.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !(run.step.is_finite() && run.step > 0.0) {
            return bad("run.step must be positive".into());
        }
        if !(run.einstein_fraction > 0.0 && run.einstein_fraction < 1.0) {
            return bad("run.einstein_fraction must lie in (0, 1)".into());
        }
        if run.einstein_check && (!standard || run.grid.is_none()) {
            return bad("einstein_check needs module scalar r=2 and run.grid".into());
        }
        let t = &run.tolerances;
        for (name, v) in tolerance_entries(t) {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        if t.ambiguous_low >= t.ambiguous_high {
            return bad("ambiguous_low must be below ambiguous_high".into());
        }
        if run.oracle.oversampling < 3 || !(run.oracle.sample_box > 0.0) {
            return bad("run.oracle needs oversampling ≥ 3 and a positive sample_box".into());
        }
        if self.output.formats.is_empty() {
            return bad("output.formats is empty".into());
        }
        Ok(())
    }

    pub fn context(&self) -> CliResult<Arc<AlgebraContext>> {
        Ok(Arc::new(AlgebraContext::new(self.n(), self.module)?))
    }

    pub fn chart(&self) -> CliResult<MetricChart> {
        let n = self.n();
        let p = &self.metric.params;
        let chart = match self.metric.family {
            MetricName::Flat => MetricChart::flat(n),
            MetricName::Sphere => MetricChart::sphere(n, p.radius.expect("validated"))?,
            MetricName::Hyperbolic => MetricChart::hyperbolic(n, p.radius.expect("validated"))?,
            MetricName::ConformalPoly => {
                let phi = p.phi.as_ref().expect("validated").to_polynomial(n)?;
                return Ok(MetricChart::conformal_poly(
                    phi,
                    self.metric.domain.expect("validated"),
                )?);
            }
        };
        Ok(match self.metric.domain {
            Some(d) => chart.with_domain(d)?,
            None => chart,
        })
    }

    pub fn lower_order(&self) -> CliResult<Option<LowerOrderTensor>> {
        let Some(lo) = &self.lower_order else {
            return Ok(None);
        };
        let n = self.n();
        let upper = lo
            .components
            .iter()
            .map(|c| c.to_polynomial(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(LowerOrderTensor::from_upper(n, upper, lo.project)?))
    }

    /// The flat system for flat runs without `A`, the explicit system
    /// otherwise.
    pub fn system(&self) -> CliResult<ClosedSystem> {
        let ctx = self.context()?;
        let chart = self.chart()?;
        let a = self.lower_order()?;
        if chart.is_flat() && a.is_none() {
            return Ok(ClosedSystem::flat(ctx, chart)?);
        }
        let a = a.unwrap_or_else(|| LowerOrderTensor::zero(self.n()));
        Ok(ClosedSystem::einstein(ctx, chart, a)?)
    }

    pub fn transport_options(&self) -> TransportOptions {
        TransportOptions {
            step: self.run.step,
            estimate_error: self.run.estimate_error,
        }
    }

    pub fn kernel_policy(&self) -> KernelPolicy {
        let t = &self.run.tolerances;
        KernelPolicy {
            threshold: t.kernel,
            ambiguous: (t.ambiguous_low, t.ambiguous_high),
        }
    }

    pub fn collocation_options(&self) -> CollocationOptions {
        let o = &self.run.oracle;
        CollocationOptions {
            seed: o.seed,
            oversampling: o.oversampling,
            sample_box: o.sample_box,
            relative_threshold: self.run.tolerances.collocation_relative,
            min_gap: self.run.tolerances.collocation_gap,
        }
    }

    /// The collocation operator matching this run, if one exists.
    pub fn oracle_operator(&self) -> Option<CollocationOperator> {
        if self.lower_order.is_some() {
            return None;
        }
        match (self.metric.family, self.module) {
            (MetricName::Flat, ModuleFamily::Scalar { r }) => {
                Some(CollocationOperator::FlatScalar { r })
            }
            (MetricName::Flat, ModuleFamily::Adjoint) => {
                Some(CollocationOperator::FlatConformalKilling)
            }
            (MetricName::Sphere, ModuleFamily::Scalar { r: 2 })
                if self.metric.params.phi.is_none() =>
            {
                Some(CollocationOperator::SphereTracefreeHessian {
                    radius: self.metric.params.radius.expect("validated"),
                })
            }
            _ => None,
        }
    }

    /// The equation the reconstructed bottom component must satisfy.
    pub fn residual_operator(&self) -> CliResult<ResidualOperator> {
        Ok(match self.module {
            ModuleFamily::Scalar { r: 2 } => ResidualOperator::TracefreeHessian {
                a: self.lower_order()?,
            },
            ModuleFamily::Scalar { r } => ResidualOperator::FlatTracefreeSymmetric { r },
            ModuleFamily::Adjoint => ResidualOperator::ConformalKilling,
        })
    }
}

fn tolerance_entries(t: &Tolerances) -> Vec<(String, f64)> {
    let Value::Object(map) = serde_json::to_value(t).expect("tolerances serialize") else {
        unreachable!()
    };
    map.into_iter()
        .map(|(k, v)| (k, v.as_f64().expect("numeric tolerance")))
        .collect()
}

/// `TRACTOR_TOL_<NAME>` replaces the tolerance `<name>`.
fn apply_overrides(t: &Tolerances, env: impl Fn(&str) -> Option<String>) -> CliResult<Tolerances> {
    let mut map = serde_json::Map::new();
    for (name, value) in tolerance_entries(t) {
        let key = format!("{ENV_PREFIX}{}", name.to_uppercase());
        let v = match env(&key) {
            Some(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("{key}={s:?} is not a number")))?,
            None => value,
        };
        let num = serde_json::Number::from_f64(v)
            .ok_or_else(|| CliError::Config(format!("{key} must be finite")))?;
        map.insert(name, Value::Number(num));
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        RunConfig::from_json(text, |_| None)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2}}"#).unwrap();
        assert_eq!(c.metric.family, MetricName::Flat);
        assert_eq!(c.run.loop_sizes, vec![0.4, 0.8]);
        assert_eq!(c.basepoint(), vec![0.0; 3]);
        assert_eq!(
            c.oracle_operator(),
            Some(CollocationOperator::FlatScalar { r: 2 })
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse(r#"{"algebra": {"n": 3, "m": 1}, "module": {"family": "adjoint"}}"#);
        assert!(matches!(e, Err(CliError::Config(_))));
        let e = parse(r#"{"algebra": {"n": 3}, "module": {"family": "adjoint"}, "extra": 0}"#);
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn semantic_rules() {
        for bad in [
            r#"{"algebra": {"n": 2}, "module": {"family": "adjoint"}}"#,
            r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 3}, "metric": {"family": "sphere", "params": {"radius": 1.0}}}"#,
            r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2}, "metric": {"family": "sphere"}}"#,
            r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2}, "run": {"tolerances": {"kernel": -1.0}}}"#,
            r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2}, "run": {"basepoint": [0.0]}}"#,
            r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2}, "run": {"einstein_check": true}}"#,
        ] {
            assert!(matches!(parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn environment_overrides_tolerances() {
        let text = r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2}}"#;
        let c = RunConfig::from_json(text, |k| {
            (k == "TRACTOR_TOL_RESIDUAL").then(|| "2.5e-7".into())
        })
        .unwrap();
        assert_eq!(c.run.tolerances.residual, 2.5e-7);
        assert_eq!(c.run.tolerances.kernel, 1e-6);
        let e = RunConfig::from_json(text, |k| (k == "TRACTOR_TOL_KERNEL").then(|| "abc".into()));
        assert!(matches!(e, Err(CliError::Config(_))));
        let e = RunConfig::from_json(text, |k| (k == "TRACTOR_TOL_KERNEL").then(|| "0".into()));
        assert!(matches!(e, Err(CliError::Config(_))));
    }

    #[test]
    fn systems_follow_the_metric() {
        let c = parse(
            r#"{"algebra": {"n": 3}, "module": {"family": "scalar", "r": 2},
                "metric": {"family": "sphere", "params": {"radius": 1.0}}}"#,
        )
        .unwrap();
        assert_eq!(
            c.system().unwrap().provenance(),
            tractor_core::prolongation::Provenance::ExplicitEinstein
        );
        assert!(matches!(
            c.oracle_operator(),
            Some(CollocationOperator::SphereTracefreeHessian { .. })
        ));
        let c = parse(r#"{"algebra": {"n": 3}, "module": {"family": "adjoint"}}"#).unwrap();
        assert_eq!(
            c.system().unwrap().provenance(),
            tractor_core::prolongation::Provenance::FlatZero
        );
    }
}
