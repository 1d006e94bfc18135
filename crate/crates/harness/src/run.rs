//! Check orchestration: dependency order, hypothesis gating, exit codes.

use std::collections::BTreeMap;
use std::time::Instant;

use qms_core::induced::{gns_induce, induce};
use qms_core::instances::{invariant_state_of, invariant_state_of_map, Derived};
use qms_core::linalg::operator_norm;
use qms_core::semigroup::theorem4_suite;
use qms_core::spectral::{
    ccp_test, decompose, gksl_reconstruct, identity_residual, matrix_unit_basis, rotate_basis, GkslForm,
};
use qms_core::state::{is_invariant, is_subinvariant, stationarity_residual};
use qms_core::superop::{is_cp, is_schwarz, is_unital};
use qms_core::{
    exponentiate, random, CheckReport, DensityMatrix, Error, Generator, SignConvention, SpectralDecomposition,
    Superoperator, Tolerances, VECTORIZATION,
};

use crate::report::{CheckResult, Report, StateReport, Verdict, WitnessJson};
use crate::spec::{CheckName, Dynamics, JsonMatrix, Problem, ProblemSpec, SpecError};

/// Absolute thresholds of the pipeline checks (before `--tol-scale`).
pub mod thresholds {
    pub const INTERTWINING: f64 = 1e-9;
    pub const CONTRACTION: f64 = 1e-9;
    /// Relative to max(1, ‖L̃‖).
    pub const RECONSTRUCTION: f64 = 1e-8;
    pub const ORTHONORMALITY: f64 = 1e-9;
    pub const IDENTITY: f64 = 1e-8;
    pub const JUMP_SUM: f64 = 1e-8;
    pub const ROTATION: f64 = 1e-8;
}

/// Number of random unit vectors e tried by the ccp check.
pub const CCP_VECTORS: usize = 5;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub tol_scale: f64,
    pub sign_convention: SignConvention,
    /// Largest dimension for which the ccp check (n³ × n³ operators) is attempted.
    pub max_dim: usize,
    pub timing: bool,
    /// Overrides the spec's seed.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tol_scale: 1.0, sign_convention: SignConvention::Minus, max_dim: 6, timing: false, seed: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("ccp check needs dim <= {max} (spec has dim {dim}); raise --max-dim to allow it")]
    DimensionCap { dim: usize, max: usize },
    #[error("tolerance scale must be finite and positive, got {0}")]
    BadScale(f64),
    #[error("{0}")]
    Hypothesis(String),
    #[error("numeric failure: {0}")]
    Numeric(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Spec(_) | Self::DimensionCap { .. } | Self::BadScale(_) => 2,
            Self::Hypothesis(_) => 1,
            Self::Numeric(_) => 3,
        }
    }
}

/// Errors that signal a numerical breakdown rather than a property failing.
pub fn is_numeric(e: &Error) -> bool {
    matches!(
        e,
        Error::NoConvergence { .. }
            | Error::ScalingFailure { .. }
            | Error::IllConditioned { .. }
            | Error::DegenerateBlock { .. }
            | Error::EstimatorNonConvergence { .. }
            | Error::ReconstructionFailure { .. }
            | Error::CcpInconsistent { .. }
            | Error::NonFinite
    )
}

pub fn sign_convention_name(c: SignConvention) -> &'static str {
    match c {
        SignConvention::Minus => "minus",
        SignConvention::Plus => "plus",
    }
}

pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<Report, RunError> {
    run_problem(&spec.validate()?, opts)
}

pub fn run_problem(p: &Problem, opts: &RunOptions) -> Result<Report, RunError> {
    if !(opts.tol_scale.is_finite() && opts.tol_scale > 0.0) {
        return Err(RunError::BadScale(opts.tol_scale));
    }
    if p.checks.contains(&CheckName::Ccp) && p.dim > opts.max_dim {
        return Err(RunError::DimensionCap { dim: p.dim, max: opts.max_dim });
    }
    let mut ctx = Ctx::new(p, opts);
    let checks: Vec<CheckResult> = p.checks.iter().map(|&c| ctx.get(c).clone()).collect();
    let exit_code = if ctx.numeric_failure {
        3
    } else if checks.iter().any(|c| c.verdict == Verdict::Fail) {
        1
    } else {
        0
    };
    Ok(Report {
        vectorization: VECTORIZATION,
        dim: p.dim,
        seed: ctx.seed,
        sign_convention: sign_convention_name(opts.sign_convention),
        tolerance_scale: opts.tol_scale,
        times: ctx.maps_times(),
        state: StateReport {
            source: if p.state.is_some() { "given" } else { "derived" },
            matrix: ctx.state.as_ref().map(|r| JsonMatrix::from_matrix(r.matrix())),
            rejection: ctx.rejection.clone(),
        },
        checks,
        exit_code,
    })
}

/// Resolves the state a problem runs against: the given one, or the unique
/// invariant state of its dynamics. `Err` carries the rejection reason.
pub fn resolve_state(p: &Problem, tol: &Tolerances) -> Result<DensityMatrix, String> {
    if let Some(s) = &p.state {
        return Ok(s.clone());
    }
    let derived = match &p.dynamics {
        Dynamics::Generator(l) => invariant_state_of(l, tol),
        Dynamics::Member { map, .. } => invariant_state_of_map(map, tol),
    };
    match derived {
        Ok(Derived::State(r)) => Ok(r),
        Ok(Derived::Rejected(r)) => Err(r.reason().to_string()),
        Err(e) => Err(e.to_string()),
    }
}

struct Ctx<'a> {
    p: &'a Problem,
    opts: &'a RunOptions,
    tol: Tolerances,
    seed: u64,
    maps: Result<Vec<(f64, Superoperator)>, Error>,
    state: Option<DensityMatrix>,
    rejection: Option<String>,
    results: BTreeMap<CheckName, CheckResult>,
    decomposition: Option<SpectralDecomposition>,
    numeric_failure: bool,
}

impl<'a> Ctx<'a> {
    fn new(p: &'a Problem, opts: &'a RunOptions) -> Self {
        let tol = p.tolerances.scaled(opts.tol_scale);
        let maps = match &p.dynamics {
            Dynamics::Generator(l) => p.times.iter().map(|&t| exponentiate(l, t).map(|m| (t, m))).collect(),
            Dynamics::Member { map, time } => Ok(vec![(*time, map.clone())]),
        };
        let (state, rejection) = match resolve_state(p, &tol) {
            Ok(s) => (Some(s), None),
            Err(why) => (None, Some(why)),
        };
        Self {
            p,
            opts,
            tol,
            seed: opts.seed.unwrap_or(p.seed),
            maps,
            state,
            rejection,
            results: BTreeMap::new(),
            decomposition: None,
            numeric_failure: false,
        }
    }

    fn maps_times(&self) -> Vec<f64> {
        match &self.p.dynamics {
            Dynamics::Generator(_) => self.p.times.clone(),
            Dynamics::Member { time, .. } => vec![*time],
        }
    }

    fn get(&mut self, c: CheckName) -> &CheckResult {
        if !self.results.contains_key(&c) {
            let start = Instant::now();
            let mut r = match self.compute(c) {
                Ok(r) => r,
                Err(e) => {
                    self.numeric_failure |= is_numeric(&e);
                    CheckResult { error: Some(e.to_string()), ..CheckResult::new(c, Verdict::Fail) }
                }
            };
            if self.opts.timing {
                r.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            self.results.insert(c, r);
        }
        &self.results[&c]
    }

    /// Skip reason if a prerequisite does not hold.
    fn require(&mut self, deps: &[CheckName]) -> Option<String> {
        for &d in deps {
            let v = self.get(d).verdict;
            if !v.holds() {
                return Some(format!("hypothesis `{d}` reported {}", v.as_str()));
            }
        }
        None
    }

    fn scale(&self) -> f64 {
        self.opts.tol_scale
    }

    fn generator(&self) -> Option<&'a Generator> {
        match &self.p.dynamics {
            Dynamics::Generator(l) => Some(l),
            Dynamics::Member { .. } => None,
        }
    }

    fn maps(&self) -> qms_core::Result<&[(f64, Superoperator)]> {
        self.maps.as_deref().map_err(Clone::clone)
    }

    fn compute(&mut self, c: CheckName) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        let needs_state = matches!(c, Faithful | Invariance | Subinvariance | Induce | Gns | Theorem4 | Decompose);
        if needs_state && self.state.is_none() {
            let why = self.rejection.clone().unwrap_or_default();
            return Ok(CheckResult::skipped(c, format!("no invariant state: {why}")));
        }
        let needs_generator = matches!(c, Theorem4 | Decompose | Ccp | Gksl);
        if needs_generator && self.generator().is_none() {
            return Ok(CheckResult::skipped(c, "needs a generator; the spec gives a single semigroup member"));
        }
        match c {
            Faithful => self.faithful(),
            Invariance => self.invariance(),
            Subinvariance => self.map_check(c, "min_eigenvalue", true, |t, r, tol, _| is_subinvariant(t, r, tol)),
            Schwarz => self.map_check(c, "min_eigenvalue", true, |t, _, tol, seed| is_schwarz(t, seed, tol)),
            Cp => self.map_check(c, "choi_min_eigenvalue", true, |t, _, tol, _| is_cp(t, tol)),
            Unital => self.map_check(c, "identity_residual", false, |t, _, tol, _| is_unital(t, tol)),
            Induce => self.induce(),
            Gns => self.gns(),
            Theorem4 => self.theorem4(),
            Decompose => self.decompose(),
            Ccp => self.ccp(),
            Gksl => self.gksl(),
        }
    }

    fn rho(&self) -> &DensityMatrix {
        self.state.as_ref().expect("state checked before use")
    }

    fn faithful(&mut self) -> qms_core::Result<CheckResult> {
        let r = self.rho();
        let v = if r.is_faithful() { Verdict::Pass } else { Verdict::Fail };
        Ok(CheckResult::new(CheckName::Faithful, v).residual("min_eigenvalue", r.min_eigenvalue()))
    }

    fn invariance(&mut self) -> qms_core::Result<CheckResult> {
        let mut res = self
            .map_check(CheckName::Invariance, "trace_norm_residual", false, |t, r, tol, _| is_invariant(t, r, tol))?;
        if let Some(l) = self.generator() {
            let s = stationarity_residual(l.superop(), self.rho(), &self.tol)?;
            if s > self.tol.invariance && res.verdict.holds() {
                res.verdict = Verdict::Fail;
            }
            res = res.residual("stationarity", s);
        }
        Ok(res)
    }

    /// Runs a map-level check at every semigroup time and keeps the worst value.
    fn map_check(
        &mut self,
        name: CheckName,
        key: &str,
        lower_is_worse: bool,
        f: impl Fn(&Superoperator, &DensityMatrix, &Tolerances, u64) -> qms_core::Result<CheckReport>,
    ) -> qms_core::Result<CheckResult> {
        let placeholder;
        let rho = match &self.state {
            Some(r) => r,
            None => {
                // Map-only checks do not look at the state.
                placeholder = DensityMatrix::maximally_mixed(self.p.dim, &self.tol)?;
                &placeholder
            }
        };
        let mut verdict = Verdict::Pass;
        let mut worst: Option<f64> = None;
        let mut witness = None;
        let mut at = None;
        for (t, map) in self.maps()? {
            let rep = f(map, rho, &self.tol, self.seed)?;
            let v = Verdict::from(rep.verdict);
            let is_worse = match worst {
                None => true,
                Some(w) => (lower_is_worse && rep.value < w) || (!lower_is_worse && rep.value > w),
            };
            if is_worse {
                worst = Some(rep.value);
            }
            if v == Verdict::Fail && verdict != Verdict::Fail {
                verdict = Verdict::Fail;
                witness = rep.witness.as_ref().map(WitnessJson::from);
                at = Some(*t);
            } else if v == Verdict::NotFalsified && verdict == Verdict::Pass {
                verdict = Verdict::NotFalsified;
            }
        }
        let mut res = CheckResult::new(name, verdict).residual(key, worst.unwrap_or(0.0));
        res.witness = witness;
        if let Some(t) = at {
            res = res.residual("failing_time", t);
        }
        Ok(res)
    }

    fn induce(&mut self) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        if let Some(why) = self.require(&[Faithful, Subinvariance, Schwarz]) {
            return Ok(CheckResult::skipped(Induce, why));
        }
        let (mut inter, mut norm, mut choi_min, mut mismatches) = (0.0f64, 0.0f64, f64::INFINITY, 0usize);
        for (_, t) in self.maps()? {
            let m = induce(t, self.rho())?;
            inter = inter.max(m.residual);
            norm = norm.max(operator_norm(m.t_tilde.matrix())?);
            let (a, b) = (is_cp(t, &self.tol)?, is_cp(&m.t_tilde, &self.tol)?);
            choi_min = choi_min.min(b.value);
            mismatches += usize::from(a.verdict != b.verdict);
        }
        let s = self.scale();
        let ok = inter <= thresholds::INTERTWINING * s && norm <= 1.0 + thresholds::CONTRACTION * s && mismatches == 0;
        Ok(CheckResult::new(Induce, if ok { Verdict::Pass } else { Verdict::Fail })
            .residual("intertwining", inter)
            .residual("s2_operator_norm", norm)
            .residual("induced_choi_min_eigenvalue", choi_min)
            .residual("cp_transfer_mismatches", mismatches as f64))
    }

    fn gns(&mut self) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        if let Some(why) = self.require(&[Faithful, Subinvariance, Schwarz]) {
            return Ok(CheckResult::skipped(Gns, why));
        }
        let mut norm = 0.0f64;
        for (_, t) in self.maps()? {
            norm = norm.max(gns_induce(t, self.rho(), &self.tol)?);
        }
        let ok = norm <= 1.0 + thresholds::CONTRACTION * self.scale();
        Ok(CheckResult::new(Gns, if ok { Verdict::Pass } else { Verdict::Fail }).residual("gns_operator_norm", norm))
    }

    fn theorem4(&mut self) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        if let Some(why) = self.require(&[Faithful, Subinvariance, Schwarz]) {
            return Ok(CheckResult::skipped(Theorem4, why));
        }
        let l = self.generator().expect("checked");
        let r = theorem4_suite(l, self.rho(), self.seed, &self.tol)?;
        if !r.hypotheses.hold() {
            return Ok(CheckResult::skipped(Theorem4, format!("suite hypotheses do not hold: {:?}", r.hypotheses)));
        }
        let v = if r.clauses_pass() { Verdict::Pass } else { Verdict::Fail };
        Ok(CheckResult::new(Theorem4, v)
            .residual("intertwining", r.intertwining)
            .residual("extended_generator", r.extended)
            .residual("finite_difference_agreement", r.fd_agreement)
            .residual("extended_generator_rotated_basis", r.extended_rotated)
            .residual("exponential_consistency", r.exp_consistency)
            .residual("continuity_monotone", if r.continuity_monotone { 1.0 } else { 0.0 })
            .note("basis", "rho-eigenbasis-descending"))
    }

    fn decompose(&mut self) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        if let Some(why) = self.require(&[Faithful, Invariance]) {
            return Ok(CheckResult::skipped(Decompose, why));
        }
        let l = self.generator().expect("checked");
        let lt = induce(l.superop(), self.rho())?.t_tilde;
        let d = decompose(&lt, &self.tol)?;
        let scale = operator_norm(lt.matrix())?.max(1.0);
        let rec = d.residual.unwrap_or(f64::INFINITY);
        let ident = identity_residual(&d, self.rho())?;
        let lambda_min = d.lambda.iter().copied().fold(f64::INFINITY, f64::min);
        let s = self.scale();
        let ok = rec <= thresholds::RECONSTRUCTION * s * scale
            && d.orthonormality <= thresholds::ORTHONORMALITY * s
            && d.u_hermiticity <= thresholds::ORTHONORMALITY * s
            && ident <= thresholds::IDENTITY * s
            && lambda_min > 0.0;
        let res = CheckResult::new(Decompose, if ok { Verdict::Pass } else { Verdict::Fail })
            .residual("reconstruction", rec)
            .residual("orthonormality", d.orthonormality)
            .residual("hermiticity", d.u_hermiticity)
            .residual("identity", ident)
            .residual("lambda_min", lambda_min)
            .residual("terms", d.len() as f64);
        self.decomposition = Some(d);
        Ok(res)
    }

    fn ccp(&mut self) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        if let Some(why) = self.require(&[Decompose]) {
            return Ok(CheckResult::skipped(Ccp, why));
        }
        let d = self.decomposition.as_ref().expect("decompose passed");
        let n = self.p.dim;
        let mut rng = random::rng(self.seed);
        let (mut sandwich, mut kernel, mut m_norm, mut all) = (f64::INFINITY, f64::INFINITY, 0.0f64, true);
        for _ in 0..CCP_VECTORS {
            let e = random::unit_vector(&mut rng, n);
            let r = ccp_test(d, &e, self.opts.sign_convention, &self.tol)?;
            sandwich = sandwich.min(r.sandwich_min / r.m_norm.max(f64::MIN_POSITIVE));
            kernel = kernel.min(r.kernel_min);
            m_norm = m_norm.max(r.m_norm);
            all &= r.ccp;
        }
        Ok(CheckResult::new(Ccp, if all { Verdict::Pass } else { Verdict::Fail })
            .residual("sandwich_min_relative", sandwich)
            .residual("kernel_min_eigenvalue", kernel)
            .residual("m_norm", m_norm)
            .note("sign_convention", sign_convention_name(self.opts.sign_convention)))
    }

    fn gksl(&mut self) -> qms_core::Result<CheckResult> {
        use CheckName::*;
        if let Some(why) = self.require(&[Decompose]) {
            return Ok(CheckResult::skipped(Gksl, why));
        }
        let d = self.decomposition.as_ref().expect("decompose passed");
        let l = self.generator().expect("checked");
        let n = self.p.dim;
        let units = matrix_unit_basis(n);
        let g = gksl_reconstruct(d, self.rho(), l.superop(), &units, &self.tol)?;
        let w = random::unitary(&mut random::rng(self.seed), n * n);
        let rotated = gksl_reconstruct(d, self.rho(), l.superop(), &rotate_basis(&units, &w), &self.tol)?;
        let delta = (rotated.residual - g.residual).abs();
        let s = self.scale();
        let ok = g.sum_residual <= thresholds::JUMP_SUM * s && delta <= thresholds::ROTATION * s;
        Ok(gksl_residuals(CheckResult::new(Gksl, if ok { Verdict::Pass } else { Verdict::Fail }), &g)
            .residual("rotation_delta", delta)
            .note("basis", "matrix-units"))
    }
}

fn gksl_residuals(r: CheckResult, g: &GkslForm) -> CheckResult {
    r.residual("generator", g.residual)
        .residual("generator_unpruned", g.residual_unpruned)
        .residual("jump_sum", g.sum_residual)
        .residual("jumps", g.jumps.len() as f64)
        .residual("pruned", (g.unpruned - g.jumps.len()) as f64)
}
