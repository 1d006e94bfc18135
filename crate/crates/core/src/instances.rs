//! Reproducible test instances: random Lindblad generators with their unique
//! invariant states, closed-form presets and counterexamples.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, null_space, operator_norm, HermitianMatrix};
use crate::matrix::{ComplexMatrix, C64};
use crate::random;
use crate::semigroup::{exponentiate, Generator, Provenance, SUITE_TIMES};
use crate::state::DensityMatrix;
use crate::superop::{is_cp, is_unital, unvectorize, Superoperator};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    GkslRandom,
    ThermalQubit,
    TransposeCounterexample,
    UnitaryCommutant,
    Raw,
}

impl InstanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::GkslRandom => "gksl-random",
            InstanceKind::ThermalQubit => "thermal-qubit",
            InstanceKind::TransposeCounterexample => "transpose-counterexample",
            InstanceKind::UnitaryCommutant => "unitary-commutant",
            InstanceKind::Raw => "raw",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            InstanceKind::GkslRandom,
            InstanceKind::ThermalQubit,
            InstanceKind::TransposeCounterexample,
            InstanceKind::UnitaryCommutant,
            InstanceKind::Raw,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GkslParams {
    pub num_jumps: usize,
    pub hamiltonian_scale: f64,
    pub rate_min: f64,
    pub rate_max: f64,
}

impl Default for GkslParams {
    fn default() -> Self {
        Self { num_jumps: 2, hamiltonian_scale: 1.0, rate_min: 0.5, rate_max: 2.0 }
    }
}

/// Hamiltonian and (jump operator, rate) pairs of a Lindblad generator.
#[derive(Clone, Debug, PartialEq)]
pub struct GkslData {
    pub hamiltonian: ComplexMatrix,
    pub jumps: Vec<(ComplexMatrix, f64)>,
}

impl GkslData {
    pub fn generator(&self) -> Result<Generator> {
        Generator::gksl(&self.hamiltonian, &self.jumps)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }
}

/// H = scale · (random Hermitian); V_j Ginibre normalized to ‖V_j‖_∞ = 1;
/// rates uniform on [rate_min, rate_max].
pub fn random_gksl_data(dim: usize, params: &GkslParams, seed: u64) -> GkslData {
    let mut rng = random::rng(seed);
    let hamiltonian = random::hermitian(&mut rng, dim).scale_real(params.hamiltonian_scale);
    let jumps = (0..params.num_jumps)
        .map(|_| {
            let g = random::ginibre(&mut rng, dim, dim);
            let norm = operator_norm(&g).expect("finite");
            let rate = rng.random_range(params.rate_min..=params.rate_max);
            (g.scale_real(1.0 / norm), rate)
        })
        .collect();
    GkslData { hamiltonian, jumps }
}

pub fn random_gksl(dim: usize, num_jumps: usize, seed: u64) -> Generator {
    let params = GkslParams { num_jumps, ..GkslParams::default() };
    random_gksl_data(dim, &params, seed).generator().expect("consistent dimensions")
}

/// Qubit with decay |1⟩ → |0⟩ at rate γ↓ and excitation at rate γ↑, H = 0.
pub fn thermal_qubit_data(gamma_down: f64, gamma_up: f64) -> GkslData {
    GkslData {
        hamiltonian: ComplexMatrix::zeros(2, 2),
        jumps: alloc::vec![(ComplexMatrix::unit(2, 0, 1), gamma_down), (ComplexMatrix::unit(2, 1, 0), gamma_up)],
    }
}

/// The γ↓ = 2, γ↑ = 1 preset.
pub fn thermal_qubit() -> Generator {
    thermal_qubit_data(2.0, 1.0).generator().expect("qubit")
}

pub fn amplitude_damping(gamma: f64) -> Generator {
    thermal_qubit_data(gamma, 0.0).generator().expect("qubit")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    /// The fixed space of the predual has dimension other than one.
    DegenerateFixedSpace {
        dimension: usize,
    },
    NonFaithful {
        min_eigenvalue: f64,
    },
    NonPositive {
        min_eigenvalue: f64,
    },
}

impl Rejection {
    pub fn reason(&self) -> &'static str {
        match self {
            Rejection::DegenerateFixedSpace { .. } => "degenerate-fixed-space",
            Rejection::NonFaithful { .. } => "non-faithful",
            Rejection::NonPositive { .. } => "non-positive",
        }
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)] // produced once per problem
pub enum Derived {
    State(DensityMatrix),
    Rejected(Rejection),
}

impl Derived {
    pub fn state(self) -> Option<DensityMatrix> {
        match self {
            Derived::State(s) => Some(s),
            Derived::Rejected(_) => None,
        }
    }
}

fn state_from_null_space(p: &Superoperator, tol: &Tolerances) -> Result<Derived> {
    let smax = crate::linalg::operator_norm(p.matrix())?;
    let (ns, _) = null_space(p.matrix(), tol.null_space * smax.max(1.0))?;
    if ns.cols() != 1 {
        return Ok(Derived::Rejected(Rejection::DegenerateFixedSpace { dimension: ns.cols() }));
    }
    let m = unvectorize(&ns.column(0))?;
    let tr = m.trace();
    if tr.norm() < 1e-12 {
        return Ok(Derived::Rejected(Rejection::NonPositive { min_eigenvalue: f64::NAN }));
    }
    let m = m.scale(C64::new(1.0, 0.0) / tr).hermitian_part();
    let min = hermitian_eig(&HermitianMatrix::from_hermitian_part(&m), tol)?.min();
    if min < -tol.psd_clip {
        return Ok(Derived::Rejected(Rejection::NonPositive { min_eigenvalue: min }));
    }
    let rho = DensityMatrix::new(m, tol)?;
    if !rho.is_faithful() {
        return Ok(Derived::Rejected(Rejection::NonFaithful { min_eigenvalue: rho.min_eigenvalue() }));
    }
    Ok(Derived::State(rho))
}

/// The unique state with L†(ρ) = 0, or the reason there is none usable.
pub fn invariant_state_of(l: &Generator, tol: &Tolerances) -> Result<Derived> {
    let p = l.superop().predual(tol);
    if !p.hermiticity_preserving {
        return Err(Error::NotHermiticityPreserving { deviation: p.deviation });
    }
    state_from_null_space(&p.map, tol)
}

/// The unique state with T†(ρ) = ρ for a single map.
pub fn invariant_state_of_map(t: &Superoperator, tol: &Tolerances) -> Result<Derived> {
    let p = t.predual(tol);
    if !p.hermiticity_preserving {
        return Err(Error::NotHermiticityPreserving { deviation: p.deviation });
    }
    state_from_null_space(&p.map.sub(&Superoperator::identity(t.dim()))?, tol)
}

/// L = Θ − id with Θ the transpose. Not CP at any t > 0, yet I/n is invariant.
pub fn transpose_counterexample(dim: usize) -> Result<Generator> {
    if dim < 2 {
        return Err(Error::Precondition("transpose counterexample needs dim >= 2"));
    }
    let l = Superoperator::transpose_map(dim).sub(&Superoperator::identity(dim))?;
    Ok(Generator::new(l, Provenance::Derived))
}

/// e^{t(Θ − id)} = e^{−t}(cosh t · id + sinh t · Θ), since Θ² = id.
pub fn transpose_closed_form(dim: usize, t: f64) -> Superoperator {
    let id = Superoperator::identity(dim).scale((-t).exp() * t.cosh());
    let th = Superoperator::transpose_map(dim).scale((-t).exp() * t.sinh());
    id.add(&th).expect("same dimension")
}

/// L = Σ_j γ_j (U_j† · U_j − id) with U_j diagonal in the eigenbasis of ρ.
pub fn unitary_commutant_instance(rho: &DensityMatrix, num_unitaries: usize, seed: u64) -> Result<Generator> {
    rho.require_faithful()?;
    let n = rho.dim();
    let w = rho.eigenbasis();
    let mut rng = random::rng(seed);
    let mut l = Superoperator::zero(n);
    let id = Superoperator::identity(n);
    for _ in 0..num_unitaries {
        let phases: Vec<C64> =
            (0..n).map(|_| C64::from_polar(1.0, rng.random_range(0.0..core::f64::consts::TAU))).collect();
        let u = &(&w * &ComplexMatrix::diag(&phases)) * &w.adjoint();
        let gamma = rng.random_range(0.5..=2.0);
        let term = Superoperator::sandwich(&u.adjoint(), &u)?.sub(&id)?;
        l = l.add(&term.scale(gamma))?;
    }
    Ok(Generator::new(l, Provenance::Derived))
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub dim: usize,
    pub kind: InstanceKind,
    pub params: GkslParams,
    pub seed: u64,
}

/// A random instance whose hypotheses were verified: L(I) = 0, unique
/// faithful invariant state, e^{tL} CP and unital at the suite times.
#[derive(Clone, Debug)]
pub struct AcceptedInstance {
    pub seed: u64,
    pub data: GkslData,
    pub generator: Generator,
    pub rho: DensityMatrix,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Telemetry {
    pub attempts: usize,
    pub accepted: usize,
    pub degenerate: usize,
    pub non_faithful: usize,
    pub non_positive: usize,
    pub hypothesis_failures: usize,
}

impl Telemetry {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempts as f64
        }
    }
}

/// Seed of the i-th attempt derived from a base seed.
pub fn attempt_seed(base: u64, i: u64) -> u64 {
    base ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttemptFailure {
    Rejected(Rejection),
    /// ‖L(I)‖ above 1e-12, or e^{tL} not CP and unital at some suite time.
    Hypothesis,
}

pub fn try_accept(
    dim: usize,
    params: &GkslParams,
    seed: u64,
    tol: &Tolerances,
) -> Result<core::result::Result<AcceptedInstance, AttemptFailure>> {
    let data = random_gksl_data(dim, params, seed);
    let generator = data.generator()?;
    if generator.unitality_residual > 1e-12 {
        return Ok(Err(AttemptFailure::Hypothesis));
    }
    let rho = match invariant_state_of(&generator, tol)? {
        Derived::State(rho) => rho,
        Derived::Rejected(r) => return Ok(Err(AttemptFailure::Rejected(r))),
    };
    for &t in &SUITE_TIMES {
        let tt = exponentiate(&generator, t)?;
        if !is_cp(&tt, tol)?.verdict.holds() || !is_unital(&tt, tol)?.verdict.holds() {
            return Ok(Err(AttemptFailure::Hypothesis));
        }
    }
    Ok(Ok(AcceptedInstance { seed, data, generator, rho }))
}

/// Draws until `count` instances are accepted or `max_attempts` is reached.
pub fn accepted_instances(
    dim: usize,
    params: &GkslParams,
    count: usize,
    base_seed: u64,
    max_attempts: usize,
    tol: &Tolerances,
) -> Result<(Vec<AcceptedInstance>, Telemetry)> {
    let mut out = Vec::with_capacity(count);
    let mut tel = Telemetry::default();
    let mut i = 0u64;
    while out.len() < count && tel.attempts < max_attempts {
        tel.attempts += 1;
        match try_accept(dim, params, attempt_seed(base_seed, i), tol)? {
            Ok(inst) => {
                tel.accepted += 1;
                out.push(inst);
            }
            Err(AttemptFailure::Rejected(Rejection::DegenerateFixedSpace { .. })) => tel.degenerate += 1,
            Err(AttemptFailure::Rejected(Rejection::NonFaithful { .. })) => tel.non_faithful += 1,
            Err(AttemptFailure::Rejected(Rejection::NonPositive { .. })) => tel.non_positive += 1,
            Err(AttemptFailure::Hypothesis) => tel.hypothesis_failures += 1,
        }
        i += 1;
    }
    Ok((out, tel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn zero_jumps_zero_hamiltonian_is_zero() {
        let params = GkslParams { num_jumps: 0, hamiltonian_scale: 0.0, ..GkslParams::default() };
        let l = random_gksl_data(3, &params, 9).generator().unwrap();
        assert_eq!(l.superop().matrix().max_abs(), 0.0);
        assert!(matches!(
            invariant_state_of(&l, &tol()).unwrap(),
            Derived::Rejected(Rejection::DegenerateFixedSpace { dimension: 9 })
        ));
    }

    #[test]
    fn thermal_invariant_state() {
        let rho = invariant_state_of(&thermal_qubit(), &tol()).unwrap().state().unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::real_diag(&[2.0 / 3.0, 1.0 / 3.0])) < 1e-12);
    }

    #[test]
    fn amplitude_damping_rejected_as_non_faithful() {
        match invariant_state_of(&amplitude_damping(1.0), &tol()).unwrap() {
            Derived::Rejected(Rejection::NonFaithful { min_eigenvalue }) => assert!(min_eigenvalue.abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_gksl_is_deterministic_and_unital() {
        let a = random_gksl(3, 2, 42);
        let b = random_gksl(3, 2, 42);
        assert_eq!(a.superop(), b.superop());
        assert!(a.unitality_residual < 1e-12);
        assert!(a.superop().is_hermiticity_preserving(&tol()));
    }

    #[test]
    fn transpose_closed_form_matches_exponential() {
        let l = transpose_counterexample(2).unwrap();
        for t in [0.0, 0.3, 1.0, 4.0] {
            let e = exponentiate(&l, t).unwrap();
            assert!(e.matrix().max_abs_diff(transpose_closed_form(2, t).matrix()) < 1e-12);
        }
        assert!(transpose_counterexample(1).is_err());
    }

    #[test]
    fn unitary_commutant_preserves_rho() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2], &tol()).unwrap();
        let l = unitary_commutant_instance(&rho, 2, 7).unwrap();
        let r = crate::state::stationarity_residual(l.superop(), &rho, &tol()).unwrap();
        assert!(r < 1e-12);
        let zero = unitary_commutant_instance(&rho, 0, 7).unwrap();
        assert_eq!(zero.superop(), &Superoperator::zero(3));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ["gksl-random", "thermal-qubit", "transpose-counterexample", "unitary-commutant", "raw"] {
            assert_eq!(InstanceKind::parse(k).unwrap().as_str(), k);
        }
        assert!(InstanceKind::parse("other").is_none());
    }
}
