//! The `decompose` output: spectral terms of L̃ − I and the GKSL form read off them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use qms_core::induced::induce;
use qms_core::spectral::{decompose, gksl_reconstruct, identity_residual, matrix_unit_basis};
use qms_core::VECTORIZATION;
use serde::Serialize;

use crate::report::Format;
use crate::run::{is_numeric, resolve_state, RunError, RunOptions};
use crate::spec::{Dynamics, JsonMatrix, JumpSpec, ProblemSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GkslJson {
    pub basis: &'static str,
    /// x ↦ Σ rate · (y x y† − ½{y y†, x}), with rates possibly negative.
    pub jumps: Vec<JumpSpec>,
    pub residual: f64,
    pub jump_sum_residual: f64,
    pub pruned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub vectorization: &'static str,
    pub dim: usize,
    pub state: JsonMatrix,
    /// L̃ − I = Σ λ_n |a_n⟩⟨b_n|
    pub lambda: Vec<f64>,
    pub a: Vec<JsonMatrix>,
    pub b: Vec<JsonMatrix>,
    pub residuals: BTreeMap<String, f64>,
    pub gksl: GkslJson,
}

fn core(e: qms_core::Error) -> RunError {
    if is_numeric(&e) {
        RunError::Numeric(e)
    } else {
        RunError::Hypothesis(e.to_string())
    }
}

pub fn decompose_spec(spec: &ProblemSpec, opts: &RunOptions) -> Result<DecompositionReport, RunError> {
    let p = spec.validate()?;
    let tol = p.tolerances.scaled(opts.tol_scale);
    let Dynamics::Generator(l) = &p.dynamics else {
        return Err(RunError::Hypothesis("decompose needs a generator, not a semigroup member".into()));
    };
    let rho = resolve_state(&p, &tol).map_err(|why| RunError::Hypothesis(format!("no invariant state: {why}")))?;
    if !rho.is_faithful() {
        return Err(RunError::Hypothesis("the state is not faithful".into()));
    }
    let lt = induce(l.superop(), &rho).map_err(core)?.t_tilde;
    let d = decompose(&lt, &tol).map_err(core)?;
    let g = gksl_reconstruct(&d, &rho, l.superop(), &matrix_unit_basis(p.dim), &tol).map_err(core)?;
    let mut residuals = BTreeMap::new();
    residuals.insert("reconstruction".to_string(), d.residual.unwrap_or(f64::INFINITY));
    residuals.insert("orthonormality".to_string(), d.orthonormality);
    residuals.insert("identity".to_string(), identity_residual(&d, &rho).map_err(core)?);
    Ok(DecompositionReport {
        vectorization: VECTORIZATION,
        dim: p.dim,
        state: JsonMatrix::from_matrix(rho.matrix()),
        lambda: d.lambda.clone(),
        a: d.a().iter().map(JsonMatrix::from_matrix).collect(),
        b: d.b().iter().map(JsonMatrix::from_matrix).collect(),
        residuals,
        gksl: GkslJson {
            basis: "matrix-units",
            jumps: g.jumps.iter().map(|j| JumpSpec { operator: JsonMatrix::from_matrix(&j.y), rate: j.rate }).collect(),
            residual: g.residual,
            jump_sum_residual: g.sum_residual,
            pruned: g.unpruned - g.jumps.len(),
        },
    })
}

pub fn emit_decomposition(r: &DecompositionReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => crate::json::to_bytes(r),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "dim {}  vectorization {}  terms {}", r.dim, r.vectorization, r.lambda.len());
            let lambdas: Vec<String> = r.lambda.iter().map(|l| format!("{l:.10e}")).collect();
            let _ = writeln!(s, "lambda: {}", lambdas.join(" "));
            for (k, v) in &r.residuals {
                let _ = writeln!(s, "{k}: {v:.6e}");
            }
            let _ = writeln!(
                s,
                "gksl: {} jumps ({} pruned), generator residual {:.6e}, jump sum residual {:.6e}",
                r.gksl.jumps.len(),
                r.gksl.pruned,
                r.gksl.residual,
                r.gksl.jump_sum_residual
            );
            s.into_bytes()
        }
    }
}
