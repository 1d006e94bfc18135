//! The embedding i_ρ(x) = ρ^{1/4} x ρ^{1/4}, the induced map T̃ on S₂(H),
//! and the GNS picture with inner product ω(a†b).

use crate::error::{Error, Result};
use crate::linalg::{fractional_power, hs_inner, moore_penrose, operator_norm, HermitianMatrix};
use crate::matrix::{ComplexMatrix, C64};
use crate::state::DensityMatrix;
use crate::superop::{vectorize, Superoperator};
use crate::tolerance::Tolerances;

pub fn i_rho(rho: &DensityMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let q = rho.quarter();
    &(q * x) * q
}

#[derive(Clone, Debug)]
pub struct PinvImage {
    pub value: ComplexMatrix,
    /// Set when ρ is not faithful: i_ρ⁽⁻¹⁾∘i_ρ is then only the projection
    /// onto the support, not the identity.
    pub range_only: bool,
}

/// (ρ^{1/4})⁽⁻¹⁾ x (ρ^{1/4})⁽⁻¹⁾ with the Moore–Penrose inverse.
pub fn i_rho_pinv(rho: &DensityMatrix, x: &ComplexMatrix, tol: &Tolerances) -> Result<PinvImage> {
    let qp = moore_penrose(rho.quarter(), tol.pinv_cutoff)?;
    Ok(PinvImage { value: &(&qp * x) * &qp, range_only: !rho.is_faithful() })
}

/// i_ρ as a superoperator.
pub fn i_rho_superop(rho: &DensityMatrix) -> Superoperator {
    Superoperator::sandwich(rho.quarter(), rho.quarter()).expect("square")
}

/// i_ρ⁻¹ as a superoperator; needs a faithful ρ.
pub fn i_rho_inv_superop(rho: &DensityMatrix) -> Result<Superoperator> {
    let q = rho.neg_quarter()?;
    Superoperator::sandwich(q, q)
}

#[derive(Clone, Debug)]
pub struct InducedMap {
    pub t_tilde: Superoperator,
    /// max over matrix units x of ‖T̃(i_ρ(x)) − i_ρ(T(x))‖₂
    pub residual: f64,
}

/// T̃ = i_ρ ∘ T ∘ i_ρ⁻¹, exact at finite dimension.
pub fn induce(t: &Superoperator, rho: &DensityMatrix) -> Result<InducedMap> {
    if t.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: rho.dim() });
    }
    let t_tilde = i_rho_superop(rho).compose(t)?.compose(&i_rho_inv_superop(rho)?)?;
    let residual = intertwining_residual(&t_tilde, t, rho)?;
    Ok(InducedMap { t_tilde, residual })
}

/// max over matrix units x of ‖S̃(i_ρ(x)) − i_ρ(S(x))‖₂
pub fn intertwining_residual(s_tilde: &Superoperator, s: &Superoperator, rho: &DensityMatrix) -> Result<f64> {
    let n = s.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = ComplexMatrix::unit(n, i, j);
            let lhs = s_tilde.apply(&i_rho(rho, &x))?;
            let rhs = i_rho(rho, &s.apply(&x)?);
            worst = worst.max(lhs.distance(&rhs));
        }
    }
    Ok(worst)
}

/// The completion of B(H) under ⟨a, b⟩_ω = Tr(ρ a† b), with cyclic vector I.
#[derive(Clone, Debug)]
pub struct GnsSpace {
    /// Gram matrix ρᵀ ⊗ I in the column-stacked matrix-unit basis.
    pub gram: ComplexMatrix,
    gram_half: ComplexMatrix,
    gram_neg_half: ComplexMatrix,
}

impl GnsSpace {
    pub fn new(rho: &DensityMatrix, tol: &Tolerances) -> Result<Self> {
        rho.require_faithful()?;
        let n = rho.dim();
        let gram = rho.matrix().transpose().kron(&ComplexMatrix::identity(n));
        let g = HermitianMatrix::from_hermitian_part(&gram);
        Ok(Self {
            gram_half: fractional_power(&g, 0.5, tol)?.into_matrix(),
            gram_neg_half: fractional_power(&g, -0.5, tol)?.into_matrix(),
            gram,
        })
    }

    /// ⟨a, b⟩_ω via the Gram matrix.
    pub fn inner(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
        let (va, vb) = (vectorize(a), vectorize(b));
        crate::matrix::dot(&va, &self.gram.mul_vec(&vb))
    }

    /// Operator norm of T̄ : π(a)Ω ↦ π(T(a))Ω in the ω-metric.
    pub fn operator_norm(&self, t: &Superoperator) -> Result<f64> {
        operator_norm(&(&(&self.gram_half * t.matrix()) * &self.gram_neg_half))
    }
}

/// Weighted operator norm of the GNS-induced map.
pub fn gns_induce(t: &Superoperator, rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    GnsSpace::new(rho, tol)?.operator_norm(t)
}

/// (Tr(a† ρ^{1/2} b ρ^{1/2}), Tr(ρ a† b)): the S₂ inner product of the
/// embedded elements and the GNS inner product.
pub fn inner_product_comparison(
    rho: &DensityMatrix,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(C64, C64)> {
    let s2 = hs_inner(&i_rho(rho, a), &i_rho(rho, b))?;
    let gns = GnsSpace::new(rho, tol)?.inner(a, b);
    Ok((s2, gns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real;
    use crate::random;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn i_rho_examples() {
        let p: f64 = 0.3;
        let rho = DensityMatrix::diagonal(&[p, 1.0 - p], &tol()).unwrap();
        assert!(i_rho(&rho, &ComplexMatrix::identity(2)).max_abs_diff(rho.half()) < 1e-15);
        let e01 = ComplexMatrix::unit(2, 0, 1);
        let expect = e01.scale_real((p * (1.0 - p)).powf(0.25));
        assert!(i_rho(&rho, &e01).max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn pinv_round_trip_and_range_flag() {
        let rho = DensityMatrix::new(random::density(&mut random::rng(11), 3), &tol()).unwrap();
        let x = random::ginibre(&mut random::rng(12), 3, 3);
        let back = i_rho_pinv(&rho, &i_rho(&rho, &x), &tol()).unwrap();
        assert!(!back.range_only);
        assert!(back.value.max_abs_diff(&x) < 1e-8);

        let pure = DensityMatrix::diagonal(&[1.0, 0.0], &tol()).unwrap();
        let r = i_rho_pinv(&pure, &ComplexMatrix::identity(2), &tol()).unwrap();
        assert!(r.range_only);
        assert!(matches!(induce(&Superoperator::identity(2), &pure), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn identity_induces_identity() {
        let rho = DensityMatrix::new(random::density(&mut random::rng(1), 3), &tol()).unwrap();
        let m = induce(&Superoperator::identity(3), &rho).unwrap();
        assert!(m.t_tilde.matrix().max_abs_diff(&ComplexMatrix::identity(9)) < 1e-12);
        assert!((gns_induce(&Superoperator::identity(3), &rho, &tol()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn commuting_conjugation_is_fixed() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2], &tol()).unwrap();
        let u = ComplexMatrix::diag(&[C64::from_polar(1.0, 0.3), C64::from_polar(1.0, -1.1), real(1.0)]);
        let t = Superoperator::sandwich(&u.adjoint(), &u).unwrap();
        let m = induce(&t, &rho).unwrap();
        assert!(m.t_tilde.matrix().max_abs_diff(t.matrix()) < 1e-14);
        assert!((m.t_tilde.s2_norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubled_identity_is_not_a_gns_contraction() {
        let rho = DensityMatrix::maximally_mixed(2, &tol()).unwrap();
        let norm = gns_induce(&Superoperator::identity(2).scale(2.0), &rho, &tol()).unwrap();
        assert!((norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let rho = DensityMatrix::new(random::density(&mut random::rng(6), 2), &tol()).unwrap();
        let id = ComplexMatrix::identity(2);
        let (a, b) = inner_product_comparison(&rho, &id, &id, &tol()).unwrap();
        assert!((a - real(1.0)).norm() < 1e-14 && (b - real(1.0)).norm() < 1e-14);

        let half = DensityMatrix::maximally_mixed(2, &tol()).unwrap();
        let z = ComplexMatrix::real_diag(&[1.0, -1.0]);
        let (a, b) = inner_product_comparison(&half, &z, &z, &tol()).unwrap();
        assert!((a - real(1.0)).norm() < 1e-14 && (b - real(1.0)).norm() < 1e-14);

        let r = DensityMatrix::diagonal(&[0.7, 0.3], &tol()).unwrap();
        let (e01, e10) = (ComplexMatrix::unit(2, 0, 1), ComplexMatrix::unit(2, 1, 0));
        let (a, b) = inner_product_comparison(&r, &e01, &e10, &tol()).unwrap();
        assert!(a.norm() < 1e-15 && b.norm() < 1e-15);
    }
}
