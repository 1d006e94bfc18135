//! Generators, their exponentials, the extended generator in the ρ-eigenbasis
//! and the generator relations of the induced semigroup.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::induced::{i_rho_inv_superop, i_rho_superop, induce, intertwining_residual};
use crate::linalg::expm;
use crate::matrix::{ComplexMatrix, I};
use crate::random;
use crate::state::{is_subinvariant, DensityMatrix};
use crate::superop::{is_schwarz, Superoperator, Verdict};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Gksl,
    RawSuperoperator,
    Derived,
}

#[derive(Clone, Debug)]
pub struct Generator {
    superop: Superoperator,
    pub provenance: Provenance,
    /// ‖L(I)‖₂
    pub unitality_residual: f64,
}

impl Generator {
    pub fn new(superop: Superoperator, provenance: Provenance) -> Self {
        let id = ComplexMatrix::identity(superop.dim());
        let unitality_residual = superop.apply(&id).expect("dimension").frobenius_norm();
        Self { superop, provenance, unitality_residual }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(Superoperator::zero(n), Provenance::Derived)
    }

    /// Heisenberg-picture Lindblad generator
    /// L(x) = i[H, x] + Σ γ (V† x V − ½{V†V, x}).
    pub fn gksl(h: &ComplexMatrix, jumps: &[(ComplexMatrix, f64)]) -> Result<Self> {
        let n = h.require_square()?;
        let id = ComplexMatrix::identity(n);
        let mut m = &id.kron(h) - &h.transpose().kron(&id);
        m = m.scale(I);
        for (v, rate) in jumps {
            if v.rows() != n || v.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.rows() });
            }
            let vd = v.adjoint();
            let vdv = &vd * v;
            let anti = &id.kron(&vdv) + &vdv.transpose().kron(&id);
            let d = &v.transpose().kron(&vd) - &anti.scale_real(0.5);
            m += &d.scale_real(*rate);
        }
        Ok(Self::new(Superoperator::from_matrix(m)?, Provenance::Gksl))
    }

    pub fn superop(&self) -> &Superoperator {
        &self.superop
    }

    pub fn dim(&self) -> usize {
        self.superop.dim()
    }

    /// Induced-norm-1 of the superoperator matrix; sets the finite-difference scale.
    pub fn norm_one(&self) -> f64 {
        self.superop.matrix().norm_one()
    }
}

/// e^{tL} for t ≥ 0. e^{0·L} is exactly the identity.
pub fn exponentiate(l: &Generator, t: f64) -> Result<Superoperator> {
    exponentiate_with(l, t, false)
}

/// As [`exponentiate`]; negative t is accepted only with `analytic_continuation`.
pub fn exponentiate_with(l: &Generator, t: f64, analytic_continuation: bool) -> Result<Superoperator> {
    if t < 0.0 && !analytic_continuation {
        return Err(Error::NegativeTime { t });
    }
    if !t.is_finite() {
        return Err(Error::ScalingFailure { norm_times_t: t });
    }
    Superoperator::from_matrix(expm(l.superop().matrix(), t)?)
}

/// Memo of e^{tL} keyed by the bit pattern of t, owned by the caller.
#[derive(Clone, Debug)]
pub struct ExpCache<'a> {
    generator: &'a Generator,
    memo: BTreeMap<u64, Superoperator>,
}

impl<'a> ExpCache<'a> {
    pub fn new(generator: &'a Generator) -> Self {
        Self { generator, memo: BTreeMap::new() }
    }

    pub fn get(&mut self, t: f64) -> Result<&Superoperator> {
        let key = t.to_bits();
        if !self.memo.contains_key(&key) {
            let e = exponentiate(self.generator, t)?;
            self.memo.insert(key, e);
        }
        Ok(&self.memo[&key])
    }
}

/// Diagnostics of the finite-difference route.
#[derive(Clone, Debug, PartialEq)]
pub struct FdDiagnostics {
    pub steps: [f64; 3],
    /// max entrywise |second-level − first-level| extrapolant.
    pub extrapolation_error: f64,
    /// Raw difference quotients at the three steps, entry of largest magnitude.
    pub raw: Vec<f64>,
}

/// Finite-difference estimator of ⟨h_n, L(x) h_m⟩ from T_t at three steps
/// t0, t0/2, t0/4 with two levels of Richardson extrapolation.
#[derive(Clone, Debug)]
pub struct FdEstimator {
    basis: ComplexMatrix,
    steps: [f64; 3],
    maps: [Superoperator; 3],
}

impl FdEstimator {
    pub fn new(l: &Generator, basis: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let t0 = tol.fd_step / l.norm_one().max(1.0);
        let steps = [t0, t0 / 2.0, t0 / 4.0];
        let maps = [exponentiate(l, steps[0])?, exponentiate(l, steps[1])?, exponentiate(l, steps[2])?];
        Ok(Self { basis, steps, maps })
    }

    pub fn estimate(&self, x: &ComplexMatrix) -> Result<(ComplexMatrix, FdDiagnostics)> {
        let h = &self.basis;
        let hd = h.adjoint();
        let mut quotients = Vec::with_capacity(3);
        for (map, &t) in self.maps.iter().zip(&self.steps) {
            let d = &map.apply(x)? - x;
            quotients.push((&(&hd * &d) * h).scale_real(1.0 / t));
        }
        let r1a = &quotients[1].scale_real(2.0) - &quotients[0];
        let r1b = &quotients[2].scale_real(2.0) - &quotients[1];
        let r2 = (&r1b.scale_real(4.0) - &r1a).scale_real(1.0 / 3.0);
        let extrapolation_error = r2.max_abs_diff(&r1b);
        let (mut bi, mut bj, mut best) = (0, 0, -1.0);
        for i in 0..r2.rows() {
            for j in 0..r2.cols() {
                if r2[(i, j)].norm() > best {
                    (bi, bj, best) = (i, j, r2[(i, j)].norm());
                }
            }
        }
        let raw = quotients.iter().map(|q| q[(bi, bj)].re).collect();
        let scale = r2.max_abs().max(1.0);
        if !r2.is_finite() || extrapolation_error > 1e-6 * scale {
            return Err(Error::EstimatorNonConvergence { extrapolation_error, raw });
        }
        Ok((r2, FdDiagnostics { steps: self.steps, extrapolation_error, raw }))
    }
}

/// The matrix [⟨h_n, L_(h)(x) h_m⟩] in a fixed orthonormal basis, by the
/// closed form and by finite differences.
#[derive(Clone, Debug)]
pub struct ExtendedGeneratorMatrix {
    pub basis: ComplexMatrix,
    pub closed_form: ComplexMatrix,
    pub estimate: ComplexMatrix,
    pub diagnostics: FdDiagnostics,
}

impl ExtendedGeneratorMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.closed_form
    }

    /// max entrywise |closed form − finite-difference estimate|
    pub fn route_agreement(&self) -> f64 {
        self.closed_form.max_abs_diff(&self.estimate)
    }
}

/// Extended generator of x in the descending eigenbasis of ρ.
pub fn extended_generator(
    l: &Generator,
    rho: &DensityMatrix,
    x: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ExtendedGeneratorMatrix> {
    rho.require_faithful()?;
    let est = FdEstimator::new(l, rho.eigenbasis(), tol)?;
    extended_generator_with(l, &est, x)
}

pub fn extended_generator_with(l: &Generator, est: &FdEstimator, x: &ComplexMatrix) -> Result<ExtendedGeneratorMatrix> {
    let h = &est.basis;
    let closed_form = &(&h.adjoint() * &l.superop().apply(x)?) * h;
    let (estimate, diagnostics) = est.estimate(x)?;
    Ok(ExtendedGeneratorMatrix { basis: h.clone(), closed_form, estimate, diagnostics })
}

/// Compression of the extended-generator matrix to Span(h_n : n ∈ F).
pub fn compression(egm: &ExtendedGeneratorMatrix, f: &[usize]) -> Result<ComplexMatrix> {
    if f.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let len = egm.closed_form.rows();
    if let Some(&bad) = f.iter().find(|&&k| k >= len) {
        return Err(Error::IndexOutOfRange { index: bad, len });
    }
    Ok(egm.closed_form.submatrix(f, f))
}

pub const SUITE_TIMES: [f64; 3] = [0.1, 1.0, 10.0];
pub const CONTINUITY_TIMES: [f64; 7] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Hypotheses of the generator relations, each recorded rather than enforced.
#[derive(Clone, Debug)]
pub struct Hypotheses {
    pub faithful: bool,
    /// Worst verdict of subinvariance of T_t over the suite times.
    pub subinvariant: Verdict,
    /// Worst verdict of the Schwarz check of T_t over the suite times.
    pub schwarz: Verdict,
}

impl Hypotheses {
    pub fn hold(&self) -> bool {
        self.faithful && self.subinvariant.holds() && self.schwarz.holds()
    }
}

#[derive(Clone, Debug)]
pub struct Theorem4Report {
    pub hypotheses: Hypotheses,
    /// max_x ‖L̃(i_ρ(x)) − i_ρ(L(x))‖₂
    pub intertwining: f64,
    /// max_x max entrywise |H† i_ρ⁻¹(L̃(i_ρ(x))) H − [⟨h_n, L(x) h_m⟩]|
    pub extended: f64,
    /// max_x max entrywise |finite-difference − closed form|
    pub fd_agreement: f64,
    /// Same as `extended` in an eigenbasis rotated inside degenerate blocks.
    pub extended_rotated: f64,
    /// max_t ‖e^{tL̃} − (e^{tL})~‖ entrywise over the suite times.
    pub exp_consistency: f64,
    /// ‖T̃_t y − y‖₂ over [`CONTINUITY_TIMES`], one row per sampled y.
    pub continuity: Vec<[f64; 7]>,
    pub continuity_monotone: bool,
}

impl Theorem4Report {
    pub fn clauses_pass(&self) -> bool {
        self.intertwining <= 1e-9
            && self.extended <= 1e-8
            && self.fd_agreement <= 1e-6
            && self.extended_rotated <= 1e-8
            && self.exp_consistency <= 1e-9
            && self.continuity_monotone
    }
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (Verdict::NotFalsified, _) | (_, Verdict::NotFalsified) => Verdict::NotFalsified,
        _ => Verdict::Pass,
    }
}

/// Checks the relations between L, the induced generator L̃ = i_ρ L i_ρ⁻¹ and
/// the extended generator, plus strong continuity of T̃_t.
pub fn theorem4_suite(l: &Generator, rho: &DensityMatrix, seed: u64, tol: &Tolerances) -> Result<Theorem4Report> {
    rho.require_faithful()?;
    let n = l.dim();
    let lsup = l.superop();
    let mut cache = ExpCache::new(l);

    let (mut subinvariant, mut schwarz) = (Verdict::Pass, Verdict::Pass);
    let mut exp_consistency = 0.0f64;
    let l_tilde = induce(lsup, rho)?.t_tilde;
    let lt_gen = Generator::new(l_tilde.clone(), Provenance::Derived);
    for &t in &SUITE_TIMES {
        let tt = cache.get(t)?.clone();
        subinvariant = worst(subinvariant, is_subinvariant(&tt, rho, tol)?.verdict);
        schwarz = worst(schwarz, is_schwarz(&tt, seed, tol)?.verdict);
        let lhs = exponentiate(&lt_gen, t)?;
        let rhs = induce(&tt, rho)?.t_tilde;
        exp_consistency = exp_consistency.max(lhs.matrix().max_abs_diff(rhs.matrix()));
    }
    let hypotheses = Hypotheses { faithful: true, subinvariant, schwarz };

    let intertwining = intertwining_residual(&l_tilde, lsup, rho)?;

    let back = i_rho_inv_superop(rho)?.compose(&l_tilde)?.compose(&i_rho_superop(rho))?;
    let extended_in = |basis: &ComplexMatrix| -> Result<(f64, f64)> {
        let est = FdEstimator::new(l, basis.clone(), tol)?;
        let (mut ext, mut fd) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                let x = ComplexMatrix::unit(n, i, j);
                let egm = extended_generator_with(l, &est, &x)?;
                let via_tilde = &(&basis.adjoint() * &back.apply(&x)?) * basis;
                ext = ext.max(via_tilde.max_abs_diff(&egm.closed_form));
                fd = fd.max(egm.route_agreement());
            }
        }
        Ok((ext, fd))
    };
    let (extended, fd_agreement) = extended_in(&rho.eigenbasis())?;
    let mut rng = random::rng(seed);
    let rotated = rho.rotated_eigenbasis(&mut rng, tol.degeneracy);
    let (extended_rotated, _) = extended_in(&rotated)?;

    let mut continuity = Vec::new();
    let mut continuity_monotone = true;
    for _ in 0..3 {
        let y = random::ginibre(&mut rng, n, n);
        let mut row = [0.0; 7];
        for (k, &t) in CONTINUITY_TIMES.iter().enumerate() {
            let tt = induce(cache.get(t)?, rho)?.t_tilde;
            row[k] = tt.apply(&y)?.distance(&y);
        }
        let slack = 1e-13 * y.frobenius_norm();
        continuity_monotone &= row.windows(2).all(|w| w[1] <= w[0] + slack);
        continuity.push(row);
    }

    Ok(Theorem4Report {
        hypotheses,
        intertwining,
        extended,
        fd_agreement,
        extended_rotated,
        exp_consistency,
        continuity,
        continuity_monotone,
    })
}
