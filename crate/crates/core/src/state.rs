//! Density matrices, the normal state ω_ρ and (sub)invariance.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{fractional_power_from, hermitian_eig, trace_norm_hermitian, EigenSystem, HermitianMatrix};
use crate::matrix::{ComplexMatrix, C64};
use crate::random;
use crate::superop::{is_unital, CheckReport, Superoperator, Verdict};
use crate::tolerance::Tolerances;

/// A positive trace-one matrix with its fractional powers precomputed.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    rho: HermitianMatrix,
    eig: EigenSystem,
    faithful: bool,
    quarter: ComplexMatrix,
    half: ComplexMatrix,
    three_quarter: ComplexMatrix,
    neg_quarter: Option<ComplexMatrix>,
    neg_half: Option<ComplexMatrix>,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let rho = HermitianMatrix::new(rho, tol.hermiticity)?;
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne { trace: tr });
        }
        let eig = hermitian_eig(&rho, tol)?;
        let power = |p: f64| fractional_power_from(&eig, p, tol).map(HermitianMatrix::into_matrix);
        let quarter = power(0.25)?;
        let faithful = eig.min() > tol.faithful;
        let (neg_quarter, neg_half) = if faithful { (Some(power(-0.25)?), Some(power(-0.5)?)) } else { (None, None) };
        Ok(Self { half: power(0.5)?, three_quarter: power(0.75)?, quarter, neg_quarter, neg_half, faithful, eig, rho })
    }

    /// diag(p_1, ..., p_n); the entries must sum to one.
    pub fn diagonal(p: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::new(ComplexMatrix::real_diag(p), tol)
    }

    /// I / n
    pub fn maximally_mixed(n: usize, tol: &Tolerances) -> Result<Self> {
        Self::new(ComplexMatrix::identity(n).scale_real(1.0 / n as f64), tol)
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.rho.as_matrix()
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    pub fn quarter(&self) -> &ComplexMatrix {
        &self.quarter
    }

    pub fn half(&self) -> &ComplexMatrix {
        &self.half
    }

    pub fn three_quarter(&self) -> &ComplexMatrix {
        &self.three_quarter
    }

    pub fn neg_quarter(&self) -> Result<&ComplexMatrix> {
        self.neg_quarter.as_ref().ok_or(Error::NotFaithful { min_eigenvalue: self.eig.min() })
    }

    pub fn neg_half(&self) -> Result<&ComplexMatrix> {
        self.neg_half.as_ref().ok_or(Error::NotFaithful { min_eigenvalue: self.eig.min() })
    }

    pub fn require_faithful(&self) -> Result<()> {
        if self.faithful {
            Ok(())
        } else {
            Err(Error::NotFaithful { min_eigenvalue: self.eig.min() })
        }
    }

    /// Eigenvalues in descending order, matching [`Self::eigenbasis`].
    pub fn eigenvalues_desc(&self) -> Vec<f64> {
        self.eig.eigenvalues.iter().rev().copied().collect()
    }

    /// Orthonormal eigenvectors h_1, ..., h_n of ρ as columns, ordered by
    /// descending eigenvalue; ties keep the eigensolver's order.
    pub fn eigenbasis(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| self.eig.vectors[(i, n - 1 - j)])
    }

    /// Index ranges of (numerically) equal eigenvalues in the descending order.
    pub fn degenerate_blocks(&self, rel_tol: f64) -> Vec<core::ops::Range<usize>> {
        let ev = self.eigenvalues_desc();
        let mut blocks = Vec::new();
        let mut start = 0;
        for k in 1..=ev.len() {
            if k == ev.len() || (ev[k - 1] - ev[k]).abs() > rel_tol * ev[k - 1].abs().max(f64::MIN_POSITIVE) {
                blocks.push(start..k);
                start = k;
            }
        }
        blocks
    }

    /// The eigenbasis with an independent Haar-random unitary applied inside
    /// every degenerate block. Still an eigenbasis of ρ.
    pub fn rotated_eigenbasis(&self, rng: &mut impl Rng, rel_tol: f64) -> ComplexMatrix {
        let h = self.eigenbasis();
        let n = self.dim();
        let mut out = h.clone();
        for block in self.degenerate_blocks(rel_tol) {
            let k = block.len();
            if k < 2 {
                continue;
            }
            let w = random::unitary(rng, k);
            for a in 0..k {
                for i in 0..n {
                    out[(i, block.start + a)] = (0..k).map(|b| h[(i, block.start + b)] * w[(b, a)]).sum();
                }
            }
        }
        out
    }

    /// ω_ρ(x) = Tr(ρ x)
    pub fn omega(&self, x: &ComplexMatrix) -> Result<C64> {
        let n = self.dim();
        if x.rows() != n || x.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.rows() });
        }
        let r = self.matrix();
        Ok((0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| r[(i, k)] * x[(k, i)]).sum())
    }
}

fn predual_image(t: &Superoperator, rho: &DensityMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    if t.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: rho.dim() });
    }
    let p = t.predual(tol);
    if !p.hermiticity_preserving {
        return Err(Error::NotHermiticityPreserving { deviation: p.deviation });
    }
    p.map.apply(rho.matrix())
}

/// ‖T†(ρ) − ρ‖₁ ≤ tol
pub fn is_invariant(t: &Superoperator, rho: &DensityMatrix, tol: &Tolerances) -> Result<CheckReport> {
    let d = &predual_image(t, rho, tol)? - rho.matrix();
    let r = trace_norm_hermitian(&HermitianMatrix::from_hermitian_part(&d), tol)?;
    Ok(CheckReport { verdict: Verdict::from_bool(r <= tol.invariance), value: r, witness: None })
}

/// λ_min(ρ − T†(ρ)) ≥ −tol
pub fn is_subinvariant(t: &Superoperator, rho: &DensityMatrix, tol: &Tolerances) -> Result<CheckReport> {
    let d = rho.matrix() - &predual_image(t, rho, tol)?;
    let min = hermitian_eig(&HermitianMatrix::from_hermitian_part(&d), tol)?.min();
    Ok(CheckReport { verdict: Verdict::from_bool(min >= -tol.invariance), value: min, witness: None })
}

/// ‖L†(ρ)‖₁, the stationarity residual of a generator.
pub fn stationarity_residual(l: &Superoperator, rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let d = predual_image(l, rho, tol)?;
    trace_norm_hermitian(&HermitianMatrix::from_hermitian_part(&d), tol)
}

#[derive(Clone, Debug)]
pub struct Promotion {
    pub invariance: CheckReport,
    /// |Tr T†(ρ) − Tr ρ|
    pub trace_residual: f64,
}

/// A subinvariant state of a unital map is invariant: ρ − T†(ρ) ≥ 0 has trace
/// Tr ρ − Tr ρ·T(I) = 0, hence vanishes.
pub fn subinvariant_unital_promotion(t: &Superoperator, rho: &DensityMatrix, tol: &Tolerances) -> Result<Promotion> {
    if !is_unital(t, tol)?.verdict.holds() {
        return Err(Error::Precondition("map is not unital"));
    }
    if !is_subinvariant(t, rho, tol)?.verdict.holds() {
        return Err(Error::Precondition("state is not subinvariant"));
    }
    let image = predual_image(t, rho, tol)?;
    let trace_residual = (image.trace() - rho.matrix().trace()).norm();
    Ok(Promotion { invariance: is_invariant(t, rho, tol)?, trace_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn faithfulness_examples() {
        assert!(DensityMatrix::diagonal(&[2.0 / 3.0, 1.0 / 3.0], &tol()).unwrap().is_faithful());
        assert!(!DensityMatrix::diagonal(&[1.0, 0.0], &tol()).unwrap().is_faithful());
        let d = [0.5, 0.5 - 1e-9, 1e-9];
        let s: f64 = d.iter().sum();
        let r = DensityMatrix::diagonal(&d.map(|x| x / s), &tol()).unwrap();
        assert!(!r.is_faithful());
        assert!(r.neg_quarter().is_err());
    }

    #[test]
    fn omega_examples() {
        let r = DensityMatrix::diagonal(&[2.0 / 3.0, 1.0 / 3.0], &tol()).unwrap();
        assert!((r.omega(&ComplexMatrix::identity(2)).unwrap() - real(1.0)).norm() < 1e-15);
        let z = ComplexMatrix::real_diag(&[1.0, -1.0]);
        assert!((r.omega(&z).unwrap() - real(1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_trace_and_negative() {
        assert!(matches!(DensityMatrix::diagonal(&[0.5, 0.6], &tol()), Err(Error::TraceNotOne { .. })));
        assert!(matches!(DensityMatrix::diagonal(&[1.5, -0.5], &tol()), Err(Error::NotPositiveSemidefinite { .. })));
    }

    #[test]
    fn cached_powers_compose() {
        let r = DensityMatrix::new(random::density(&mut random::rng(2), 3), &tol()).unwrap();
        let q = r.quarter();
        assert!((q * q).max_abs_diff(r.half()) < 1e-12);
        assert!((r.half() * q).max_abs_diff(r.three_quarter()) < 1e-12);
        assert!((r.neg_quarter().unwrap() * q).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn eigenbasis_is_descending() {
        let r = DensityMatrix::diagonal(&[0.2, 0.5, 0.3], &tol()).unwrap();
        assert_eq!(r.eigenvalues_desc(), [0.5, 0.3, 0.2]);
        let h = r.eigenbasis();
        assert!((h[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_invariant_and_promoted() {
        let r = DensityMatrix::new(random::density(&mut random::rng(4), 3), &tol()).unwrap();
        let id = Superoperator::identity(3);
        assert_eq!(is_invariant(&id, &r, &tol()).unwrap().verdict, Verdict::Pass);
        let p = subinvariant_unital_promotion(&id, &r, &tol()).unwrap();
        assert!(p.trace_residual < 1e-15);
    }

    #[test]
    fn strict_contraction_is_subinvariant_only() {
        // V = diag(1, 1/2): T†(I/2) = V†(I/2)V = diag(1/2, 1/8)
        let v = ComplexMatrix::real_diag(&[1.0, 0.5]);
        let t = Superoperator::sandwich(&v, &v.adjoint()).unwrap();
        let r = DensityMatrix::maximally_mixed(2, &tol()).unwrap();
        let inv = is_invariant(&t, &r, &tol()).unwrap();
        assert_eq!(inv.verdict, Verdict::Fail);
        assert!((inv.value - 0.375).abs() < 1e-14);
        let sub = is_subinvariant(&t, &r, &tol()).unwrap();
        assert_eq!(sub.verdict, Verdict::Pass);
        assert!(sub.value.abs() < 1e-15);
        assert!(matches!(subinvariant_unital_promotion(&t, &r, &tol()), Err(Error::Precondition(_))));
    }
}
