//! Linear maps on B(H) as n² x n² matrices acting on column-stacked vectors.

use alloc::vec::Vec;

// Float math lives in std; in no_std builds these methods come from num-traits.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, operator_norm, HermitianMatrix};
use crate::matrix::{dot, ComplexMatrix, C64, ONE, ZERO};
use crate::random;
use crate::tolerance::Tolerances;

/// vec(x)[col * n + row] = x[row, col]
pub const VECTORIZATION: &str = "column-stacking";

pub fn vectorize(x: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = (x.rows(), x.cols());
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(x[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[C64]) -> Result<ComplexMatrix> {
    let n = perfect_sqrt(v.len()).ok_or(Error::NotPerfectSquare { len: v.len() })?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| v[j * n + i]))
}

pub(crate) fn perfect_sqrt(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len).then_some(n)
}

/// Index of vec(x^T) entry corresponding to vec(x) entry `k`.
#[inline]
fn transposed_index(k: usize, n: usize) -> usize {
    (k % n) * n + k / n
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let side = matrix.require_square()?;
        let dim = perfect_sqrt(side).ok_or(Error::NotPerfectSquare { len: side })?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, matrix })
    }

    /// Builds the superoperator from its action on matrix units.
    pub fn from_action(n: usize, mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut m = ComplexMatrix::zeros(n * n, n * n);
        for j in 0..n {
            for i in 0..n {
                let col = vectorize(&f(&ComplexMatrix::unit(n, i, j)));
                m.set_column(j * n + i, &col);
            }
        }
        Self { dim: n, matrix: m }
    }

    pub fn identity(n: usize) -> Self {
        Self { dim: n, matrix: ComplexMatrix::identity(n * n) }
    }

    pub fn zero(n: usize) -> Self {
        Self { dim: n, matrix: ComplexMatrix::zeros(n * n, n * n) }
    }

    /// x ↦ x^T
    pub fn transpose_map(n: usize) -> Self {
        let mut m = ComplexMatrix::zeros(n * n, n * n);
        for k in 0..n * n {
            m[(transposed_index(k, n), k)] = ONE;
        }
        Self { dim: n, matrix: m }
    }

    /// x ↦ a x b
    pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        let n = a.require_square()?;
        if b.rows() != n || b.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.rows() });
        }
        Ok(Self { dim: n, matrix: b.transpose().kron(a) })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.rows() });
        }
        unvectorize(&self.matrix.mul_vec(&vectorize(x)))
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale_real(c) }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// Adjoint with respect to the Hilbert–Schmidt inner product.
    pub fn hs_adjoint(&self) -> Self {
        Self { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    /// The map P with Tr(P(ρ) x) = Tr(ρ T(x)), i.e. Π Sᵀ Π with Π the
    /// transpose permutation. Carries the Hermiticity-preservation status of T.
    pub fn predual(&self, tol: &Tolerances) -> Predual {
        let n = self.dim;
        let nn = n * n;
        let matrix =
            ComplexMatrix::from_fn(nn, nn, |a, b| self.matrix[(transposed_index(b, n), transposed_index(a, n))]);
        let deviation = self.hermiticity_preservation_deviation();
        Predual {
            map: Self { dim: n, matrix },
            deviation,
            hermiticity_preserving: deviation <= tol.hermiticity_preserving * self.scale_ref(),
        }
    }

    fn scale_ref(&self) -> f64 {
        self.matrix.max_abs().max(1.0)
    }

    /// max over matrix units of max |T(E_ji) − T(E_ij)†|.
    pub fn hermiticity_preservation_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let a = unvectorize(&self.matrix.column(i * n + j)).expect("square");
                let b = unvectorize(&self.matrix.column(j * n + i)).expect("square");
                dev = dev.max(a.max_abs_diff(&b.adjoint()));
            }
        }
        dev
    }

    pub fn is_hermiticity_preserving(&self, tol: &Tolerances) -> bool {
        self.hermiticity_preservation_deviation() <= tol.hermiticity_preserving * self.scale_ref()
    }

    /// Σ_ij |i⟩⟨j| ⊗ T(|i⟩⟨j|)
    pub fn choi(&self) -> ChoiMatrix {
        let n = self.dim;
        let mut c = ComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let col = self.matrix.column(j * n + i);
                for k in 0..n {
                    for l in 0..n {
                        c[(i * n + k, j * n + l)] = col[l * n + k];
                    }
                }
            }
        }
        ChoiMatrix(c)
    }

    /// Operator norm on S₂(H): column stacking is an isometry, so this is the
    /// largest singular value of the matrix.
    pub fn s2_norm(&self) -> Result<f64> {
        operator_norm(&self.matrix)
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct Predual {
    pub map: Superoperator,
    /// Hermiticity-preservation deviation of the original map.
    pub deviation: f64,
    /// When false the predual identity only holds in the HS-adjoint sense.
    pub hermiticity_preserving: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix(pub ComplexMatrix);

impl ChoiMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Established exactly (or via a sufficient condition).
    Pass,
    /// Refuted; the report carries a witness.
    Fail,
    /// Sampling found no counterexample.
    NotFalsified,
}

impl Verdict {
    pub fn holds(self) -> bool {
        !matches!(self, Verdict::Fail)
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// A violating input matrix.
    Input(ComplexMatrix),
    /// An eigenvector of a negative eigenvalue.
    Eigenvector(Vec<C64>),
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub verdict: Verdict,
    /// The quantity compared against the threshold: a minimum eigenvalue for
    /// positivity checks, a residual norm otherwise.
    pub value: f64,
    pub witness: Option<Witness>,
}

/// CP iff the Choi matrix is PSD. Non-Hermitian Choi matrices fail outright.
pub fn is_cp(t: &Superoperator, tol: &Tolerances) -> Result<CheckReport> {
    let c = t.choi().0;
    let scale = c.frobenius_norm().max(1.0);
    let dev = c.hermiticity_deviation();
    if dev > tol.hermiticity * scale {
        return Ok(CheckReport { verdict: Verdict::Fail, value: -dev, witness: None });
    }
    let es = hermitian_eig(&HermitianMatrix::from_hermitian_part(&c), tol)?;
    let min = es.min();
    let ok = min >= -tol.cp * scale;
    Ok(CheckReport {
        verdict: Verdict::from_bool(ok),
        value: min,
        witness: (!ok).then(|| Witness::Eigenvector(es.vector(0))),
    })
}

/// ‖T(I) − I‖₂
pub fn is_unital(t: &Superoperator, tol: &Tolerances) -> Result<CheckReport> {
    let n = t.dim();
    let id = ComplexMatrix::identity(n);
    let r = t.apply(&id)?.distance(&id);
    Ok(CheckReport { verdict: Verdict::from_bool(r <= tol.unital), value: r, witness: None })
}

fn min_hermitian_eig(x: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eig(&HermitianMatrix::from_hermitian_part(x), tol)?.min())
}

/// Samples PSD inputs (rank one and full rank, unit trace) and checks T(x) ≥ 0.
/// A CP map is reported as `Pass` without sampling.
pub fn is_positive_sampled(t: &Superoperator, seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    if is_cp(t, tol)?.verdict == Verdict::Pass {
        return Ok(CheckReport { verdict: Verdict::Pass, value: 0.0, witness: None });
    }
    let n = t.dim();
    let mut rng = random::rng(seed);
    let mut worst = f64::INFINITY;
    for s in 0..tol.positivity_samples {
        let rank = if s % 2 == 0 { 1 } else { n };
        let mut x = random::psd(&mut rng, n, rank);
        x = x.scale_real(1.0 / x.trace().re);
        let y = t.apply(&x)?;
        let scale = y.max_abs().max(1.0);
        let herm_dev = y.hermiticity_deviation();
        let min = min_hermitian_eig(&y, tol)?;
        worst = worst.min(min);
        if herm_dev > tol.hermiticity * scale || min < -tol.positivity * scale {
            return Ok(CheckReport { verdict: Verdict::Fail, value: min, witness: Some(Witness::Input(x)) });
        }
    }
    Ok(CheckReport { verdict: Verdict::NotFalsified, value: worst, witness: None })
}

/// Schwarz inequality T(x)†T(x) ≤ T(x†x). CP with ‖T(I)‖_∞ ≤ 1 is a proof;
/// otherwise matrix units and random inputs with ‖x‖_∞ = 1 are probed.
pub fn is_schwarz(t: &Superoperator, seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    let n = t.dim();
    let id = ComplexMatrix::identity(n);
    if is_cp(t, tol)?.verdict == Verdict::Pass && operator_norm(&t.apply(&id)?)? <= 1.0 + tol.unital {
        return Ok(CheckReport { verdict: Verdict::Pass, value: 0.0, witness: None });
    }
    schwarz_sampled(t, seed, tol)
}

/// The probing half of [`is_schwarz`], without the CP shortcut.
pub fn schwarz_sampled(t: &Superoperator, seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    let n = t.dim();
    let mut probes: Vec<ComplexMatrix> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            probes.push(ComplexMatrix::unit(n, i, j));
        }
    }
    let mut rng = random::rng(seed);
    for _ in 0..tol.schwarz_samples {
        let g = random::ginibre(&mut rng, n, n);
        let norm = operator_norm(&g)?;
        probes.push(g.scale_real(1.0 / norm));
    }
    let mut worst = f64::INFINITY;
    for x in probes {
        let tx = t.apply(&x)?;
        let txx = t.apply(&(&x.adjoint() * &x))?;
        let d = &txx - &(&tx.adjoint() * &tx);
        let scale = txx.max_abs().max(1.0);
        let min = min_hermitian_eig(&d, tol)?;
        worst = worst.min(min);
        if d.hermiticity_deviation() > tol.hermiticity * scale || min < -tol.positivity * scale {
            return Ok(CheckReport { verdict: Verdict::Fail, value: min, witness: Some(Witness::Input(x)) });
        }
    }
    Ok(CheckReport { verdict: Verdict::NotFalsified, value: worst, witness: None })
}

/// Σ_ij ⟨h_i, T(x_i† x_j) h_j⟩, the quantity that is nonnegative for CP maps.
pub fn cp_block_sum(t: &Superoperator, xs: &[ComplexMatrix], hs: &[Vec<C64>]) -> Result<C64> {
    let mut total = ZERO;
    for (xi, hi) in xs.iter().zip(hs) {
        for (xj, hj) in xs.iter().zip(hs) {
            let y = t.apply(&(&xi.adjoint() * xj))?;
            total += dot(hi, &y.mul_vec(hj));
        }
    }
    Ok(total)
}

/// Random tuple for [`cp_block_sum`].
pub fn random_block_tuple(rng: &mut impl Rng, n: usize, k: usize) -> (Vec<ComplexMatrix>, Vec<Vec<C64>>) {
    let xs = (0..k).map(|_| random::ginibre(rng, n, n)).collect();
    let hs = (0..k).map(|_| random::unit_vector(rng, n)).collect();
    (xs, hs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c64, real};
    use alloc::vec;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn column_stacking_order() {
        let (a, b, c, d) = (real(1.0), real(2.0), real(3.0), real(4.0));
        let x = ComplexMatrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap();
        assert_eq!(vectorize(&x), vec![a, c, b, d]);
        assert_eq!(unvectorize(&vectorize(&x)).unwrap(), x);
        assert!(matches!(unvectorize(&[a, b, c]), Err(Error::NotPerfectSquare { len: 3 })));
    }

    #[test]
    fn sandwich_examples() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(Superoperator::sandwich(&id, &id).unwrap(), Superoperator::identity(2));
        let p0 = ComplexMatrix::unit(2, 0, 0);
        let p1 = ComplexMatrix::unit(2, 1, 1);
        let s = Superoperator::sandwich(&p0, &p1).unwrap();
        assert_eq!(s.apply(&id).unwrap(), ComplexMatrix::zeros(2, 2));
        let x = ComplexMatrix::from_rows(&[vec![real(1.0), c64(2.0, 1.0)], vec![real(3.0), real(4.0)]]).unwrap();
        assert_eq!(s.apply(&x).unwrap(), ComplexMatrix::unit(2, 0, 1).scale(c64(2.0, 1.0)));
    }

    #[test]
    fn choi_of_identity_and_transpose() {
        let c = Superoperator::identity(2).choi().0;
        assert!((c.trace().re - 2.0).abs() < 1e-15);
        let es = hermitian_eig(&HermitianMatrix::from_hermitian_part(&c), &tol()).unwrap();
        assert!(es.eigenvalues[..3].iter().all(|l| l.abs() < 1e-14));
        assert!((es.eigenvalues[3] - 2.0).abs() < 1e-14);

        let c = Superoperator::transpose_map(2).choi().0;
        let es = hermitian_eig(&HermitianMatrix::from_hermitian_part(&c), &tol()).unwrap();
        let expect = [-1.0, 1.0, 1.0, 1.0];
        for (l, e) in es.eigenvalues.iter().zip(expect) {
            assert!((l - e).abs() < 1e-14);
        }
    }

    #[test]
    fn transpose_map_positive_but_not_cp() {
        let t = Superoperator::transpose_map(2);
        let cp = is_cp(&t, &tol()).unwrap();
        assert_eq!(cp.verdict, Verdict::Fail);
        assert!((cp.value + 1.0).abs() < 1e-13);
        assert!(is_positive_sampled(&t, 1, &tol()).unwrap().verdict.holds());
    }

    #[test]
    fn identity_passes_battery() {
        let t = Superoperator::identity(3);
        assert_eq!(is_cp(&t, &tol()).unwrap().verdict, Verdict::Pass);
        assert_eq!(is_unital(&t, &tol()).unwrap().verdict, Verdict::Pass);
        assert_eq!(is_positive_sampled(&t, 0, &tol()).unwrap().verdict, Verdict::Pass);
        assert_eq!(is_schwarz(&t, 0, &tol()).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn predual_of_unitary_conjugation() {
        let u = random::unitary(&mut random::rng(5), 3);
        let t = Superoperator::sandwich(&u.adjoint(), &u).unwrap();
        let p = t.predual(&tol());
        assert!(p.hermiticity_preserving);
        let expected = Superoperator::sandwich(&u, &u.adjoint()).unwrap();
        assert!(p.map.matrix().max_abs_diff(expected.matrix()) < 1e-14);
    }

    #[test]
    fn non_hp_map_flagged() {
        let a = ComplexMatrix::from_real(2, &[1.0, 2.0, 0.0, 1.0]);
        let t = Superoperator::sandwich(&a, &ComplexMatrix::identity(2)).unwrap();
        assert!(!t.predual(&tol()).hermiticity_preserving);
    }

    #[test]
    fn scaled_identity_is_not_schwarz() {
        let t = Superoperator::identity(2).scale(2.0);
        let r = is_schwarz(&t, 3, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(matches!(r.witness, Some(Witness::Input(_))));
    }
}
