//! Instance specs and their expansion into problem specs.

use qms_core::instances::{
    random_gksl_data, thermal_qubit_data, transpose_counterexample, unitary_commutant_instance, GkslData, GkslParams,
    InstanceKind,
};
use qms_core::{random, ComplexMatrix, DensityMatrix, Tolerances};
use serde::{Deserialize, Serialize};

use crate::spec::{Convention, GeneratorSpec, JsonMatrix, JumpSpec, ProblemSpec, SpecError};

/// Instance parameters; absent values take the sampler defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_jumps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_max: Option<f64>,
    /// Thermal qubit decay rate (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_down: Option<f64>,
    /// Thermal qubit excitation rate (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_up: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub dim: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "is_default")]
    pub parameters: InstanceParameters,
    pub seed: u64,
}

fn is_default(p: &InstanceParameters) -> bool {
    *p == InstanceParameters::default()
}

impl InstanceSpec {
    fn gksl_params(&self) -> GkslParams {
        let d = GkslParams::default();
        let p = &self.parameters;
        GkslParams {
            num_jumps: p.num_jumps.unwrap_or(d.num_jumps),
            hamiltonian_scale: p.hamiltonian_scale.unwrap_or(d.hamiltonian_scale),
            rate_min: p.rate_min.unwrap_or(d.rate_min),
            rate_max: p.rate_max.unwrap_or(d.rate_max),
        }
    }
}

fn gksl_spec(data: &GkslData) -> GeneratorSpec {
    GeneratorSpec::Gksl {
        hamiltonian: JsonMatrix::from_matrix(&data.hamiltonian),
        jumps: data.jumps.iter().map(|(v, r)| JumpSpec { operator: JsonMatrix::from_matrix(v), rate: *r }).collect(),
    }
}

fn superop_spec(m: &ComplexMatrix) -> GeneratorSpec {
    GeneratorSpec::Superoperator { convention: Convention::ColumnStacking, matrix: JsonMatrix::from_matrix(m) }
}

/// Deterministic: the same instance spec always yields the same problem spec.
pub fn generate(inst: &InstanceSpec) -> Result<ProblemSpec, SpecError> {
    let kind = InstanceKind::parse(&inst.kind).ok_or_else(|| {
        SpecError::field(
            "kind",
            format!(
                "unknown instance kind `{}` (expected gksl-random, thermal-qubit, transpose-counterexample, unitary-commutant or raw)",
                inst.kind
            ),
        )
    })?;
    let n = inst.dim;
    if n == 0 {
        return Err(SpecError::field("dim", "dimension must be at least 1"));
    }
    let params = inst.gksl_params();
    if !(params.rate_min.is_finite() && params.rate_max.is_finite() && params.rate_min <= params.rate_max) {
        return Err(SpecError::field("parameters", "need finite rate_min <= rate_max"));
    }
    let core_err = |e: qms_core::Error| SpecError::field("", e.to_string());
    let (generator, state) = match kind {
        InstanceKind::GkslRandom => (gksl_spec(&random_gksl_data(n, &params, inst.seed)), None),
        InstanceKind::Raw => {
            let l = random_gksl_data(n, &params, inst.seed).generator().map_err(core_err)?;
            (superop_spec(l.superop().matrix()), None)
        }
        InstanceKind::ThermalQubit => {
            if n != 2 {
                return Err(SpecError::field("dim", "the thermal qubit has dim 2"));
            }
            let p = &inst.parameters;
            (gksl_spec(&thermal_qubit_data(p.gamma_down.unwrap_or(2.0), p.gamma_up.unwrap_or(1.0))), None)
        }
        InstanceKind::TransposeCounterexample => {
            let l = transpose_counterexample(n).map_err(core_err)?;
            // The fixed space is degenerate, so the state must be given.
            let rho = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
            (superop_spec(l.superop().matrix()), Some(JsonMatrix::from_matrix(&rho)))
        }
        InstanceKind::UnitaryCommutant => {
            let tol = Tolerances::default();
            let rho = DensityMatrix::new(random::density(&mut random::rng(inst.seed), n), &tol).map_err(core_err)?;
            let l = unitary_commutant_instance(&rho, params.num_jumps, inst.seed).map_err(core_err)?;
            (superop_spec(l.superop().matrix()), Some(JsonMatrix::from_matrix(rho.matrix())))
        }
    };
    Ok(ProblemSpec { dim: n, generator, state, checks: None, tolerances: None, seed: Some(inst.seed), times: None })
}
