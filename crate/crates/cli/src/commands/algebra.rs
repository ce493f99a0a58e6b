use nalgebra::DMatrix;
use serde_json::{json, Value};
use tractor_core::algebra::dimension::quoted_scalar_formula;
use tractor_core::algebra::{
    cartan_product_projection, check_phi, killing_tensor_dimension, module_dimension,
    tracefree_symmetric_dimension, ModuleFamily,
};
use tractor_core::linalg::rank;

use super::Outcome;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::report::{matrix_rows, to_value, Report};

const IDENTITY_TOL: f64 = 1e-10;
const DISPLAYED_TOL: f64 = 1e-12;

/// `δ*` on `Λ¹` and `Λ²` for the standard module, entered by hand from the
/// componentwise formulas
/// `(h_b, φ_bc, f_b) ↦ ((1/n)φ^c_c, −f_b, 0)` and
/// `(h_ab, φ_abc, f_ab) ↦ ((−1/(n−1))φ_ac^c, ½f_ab, 0)`.
pub fn displayed_standard_maps(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let w = n + 2;
    let mut first = DMatrix::zeros(w, n * w);
    for b in 0..n {
        first[(0, b * w + 1 + b)] = 1.0 / n as f64;
        first[(1 + b, b * w + n + 1)] = -1.0;
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut second = DMatrix::zeros(n * w, pairs.len() * w);
    for (p, &(a, b)) in pairs.iter().enumerate() {
        // the pair (a, b) feeds output slot a with sign +1 and slot b with −1
        for (out, other, s) in [(a, b, 1.0), (b, a, -1.0)] {
            second[(out * w, p * w + 1 + other)] += -s / (n as f64 - 1.0);
            second[(out * w + 1 + other, p * w + n + 1)] += 0.5 * s;
        }
    }
    (first, second)
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let ctx = cfg.context()?;
    let n = cfg.n();
    let (alg, module, complex) = (&ctx.algebra, &ctx.module, &ctx.complex);
    alg.check_invariants()?;
    module.check_invariants(alg)?;
    let mut failures = Vec::new();

    let mut report = Report::new("algebra", cfg);
    let (gm, g0, gp) = alg.graded_dims();
    report
        .set("n", n)
        .set("module", module.family.label())
        .set("dim_W", module.dim)
        .set("N", module.top())
        .set("component_dims", to_value(&module.component_dims()))
        .set(
            "component_eigenvalues",
            to_value(&module.components.iter().map(|c| c.eigenvalue).collect::<Vec<_>>()),
        )
        .set(
            "brackets",
            json!({"algebra_dim": alg.dim(), "graded_dims": [gm, g0, gp], "algebra_ok": true, "module_ok": true}),
        );

    let mut hodge = Vec::new();
    for k in 0..=2 {
        let h = &complex.hodge[k];
        let (im_d, harm, im_ds) = h.dims();
        let total = complex.spaces[k].dim();
        let ker_d = total - rank(&complex.d[k]);
        let ker_ds = if k == 0 {
            total
        } else {
            total - rank(&complex.dstar[k])
        };
        let consistent =
            im_d + harm + im_ds == total && im_d + harm == ker_d && harm + im_ds == ker_ds;
        if !consistent {
            failures.push(format!("Hodge dimensions in degree {k} do not add up"));
        }
        let mut homs = h.harmonic_homogeneity.clone();
        homs.dedup();
        hodge.push(json!({
            "k": k,
            "form_dim": total,
            "image_d": im_d,
            "harmonic": harm,
            "image_dstar": im_ds,
            "ker_d": ker_d,
            "ker_dstar": ker_ds,
            "harmonic_homogeneities": homs,
            "consistent": consistent,
        }));
    }
    report.set("hodge", Value::Array(hodge));

    let h0 = complex.hodge[0].dims().1;
    let h1 = complex.hodge[1].dims().1;
    let r = module.family.r();
    report.set("H0_dim", h0).set("H1_dim", h1).set(
        "H1_in_homogeneity_r",
        complex.hodge[1].harmonic_of_homogeneity(r).ncols() == h1,
    );
    if h0 != module.bottom_dim() {
        failures.push(format!(
            "dim H0 = {h0} differs from dim W0 = {}",
            module.bottom_dim()
        ));
    }
    if let ModuleFamily::Scalar { r } = module.family {
        if h1 != tracefree_symmetric_dimension(n, r) {
            failures.push(format!(
                "dim H1 = {h1} differs from the tracefree symmetric count"
            ));
        }
    }

    let mut identity = 0.0_f64;
    for k in 1..=2 {
        let ds = &complex.delta_star[k];
        let d = &complex.d[k - 1];
        identity = identity
            .max((ds * d * ds - ds).amax())
            .max((d * ds * d - d).amax())
            .max((ds * &complex.hodge[k].harmonic).amax());
    }
    if identity > IDENTITY_TOL {
        failures.push(format!(
            "δ* is not a partial inverse of ∂ (defect {identity:e})"
        ));
    }
    report.set("delta_star_identity_defect", identity).set(
        "matrices",
        json!({
            "d": (0..=2).map(|k| matrix_rows(&complex.d[k])).collect::<Vec<_>>(),
            "delta_star_1": matrix_rows(&complex.delta_star[1]),
            "delta_star_2": matrix_rows(&complex.delta_star[2]),
        }),
    );

    let displayed = if module.family == (ModuleFamily::Scalar { r: 2 }) {
        let (first, second) = displayed_standard_maps(n);
        let d1 = (&complex.delta_star[1] - first).amax();
        let d2 = (&complex.delta_star[2] - second).amax();
        if d1.max(d2) > DISPLAYED_TOL {
            failures.push(format!(
                "δ* differs from the displayed maps ({d1:e}, {d2:e})"
            ));
        }
        json!({"first": d1, "second": d2, "tolerance": DISPLAYED_TOL})
    } else {
        Value::Null
    };
    report.set("displayed_map_deviation", displayed);

    let cartan = cartan_product_projection(module, complex)?;
    let mut phis = Vec::new();
    for i in 0..=module.top() {
        let c = check_phi(module, complex, &cartan, i)?;
        if !c.passes() {
            failures.push(format!("φ_{i} check failed"));
        }
        phis.push(json!({
            "i": i,
            "rank": c.rank,
            "source_dim": c.source_dim,
            "predicted_image_dim": c.predicted_image_dim,
            "image_defect": c.image_defect,
            "inverse_defect": c.inverse_defect,
            "passes": c.passes(),
        }));
    }
    report
        .set("phi", Value::Array(phis))
        .set("cartan_rank", cartan.rank);

    let expected = module_dimension(module.family, n)?;
    if expected != module.dim {
        failures.push(format!(
            "constructed dim W = {} differs from the count {expected}",
            module.dim
        ));
    }
    let mut formulas = serde_json::Map::new();
    formulas.insert("module_dimension".into(), expected.into());
    formulas.insert("constructed_dim_W".into(), module.dim.into());
    formulas.insert(
        "killing_tensor_dimension_k1".into(),
        killing_tensor_dimension(n, 1)
            .ok()
            .map_or(Value::Null, Value::from),
    );
    if let ModuleFamily::Scalar { r } = module.family {
        let quoted = quoted_scalar_formula(n, r)?;
        let consistent = quoted.to_string() == expected.to_string();
        formulas.insert(
            "tracefree_symmetric_dimension".into(),
            tracefree_symmetric_dimension(n, r).into(),
        );
        formulas.insert("quoted_scalar_formula".into(), quoted.to_string().into());
        formulas.insert("quoted_formula_consistent".into(), consistent.into());
        formulas.insert(
            "note".into(),
            "the closed form (n+2r−2)·(n+2r−2)!/(n!(r−1)!) is reported only; dim W is the binomial-difference count"
                .into(),
        );
    }
    report.set("dimension_formulas", Value::Object(formulas));
    report.set("failures", to_value(&failures));
    Ok(Outcome::new(
        vec![("algebra.json".into(), report)],
        failures,
    ))
}
