//! Decomposition L̃ = I + Σ λ_n |a_n⟩⟨b_n| through the self-adjoint singular
//! system of K = (L̃ − I)⁻¹, the ccp test on S₂(H) ⊗ H, and the jump-operator
//! form rebuilt from (λ_n, a_n, b_n).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hs_inner, moore_penrose, psd_parts, svd, HermitianMatrix};
use crate::matrix::{ComplexMatrix, C64, I, ONE, ZERO};
use crate::state::DensityMatrix;
use crate::superop::{unvectorize, vectorize, Superoperator};
use crate::tolerance::Tolerances;

#[derive(Clone, Debug)]
pub struct Resolvent {
    pub k: Superoperator,
    /// Smallest singular value of L̃ − I.
    pub gap: f64,
    /// max over matrix units of |K(x†) − K(x)†|
    pub star_deviation: f64,
}

/// K = (L̃ − I)⁻¹, refusing when 1 is within `resolvent_gap` of the spectrum.
pub fn resolvent_k(l_tilde: &Superoperator, tol: &Tolerances) -> Result<Resolvent> {
    let a = l_tilde.sub(&Superoperator::identity(l_tilde.dim()))?;
    let s = svd(a.matrix())?;
    let gap = s.sigma.last().copied().unwrap_or(0.0);
    if gap < tol.resolvent_gap {
        return Err(Error::IllConditioned { smallest_singular_value: gap });
    }
    let k = Superoperator::from_matrix(moore_penrose(a.matrix(), tol.pinv_cutoff)?)?;
    let star_deviation = k.hermiticity_preservation_deviation();
    Ok(Resolvent { k, gap, star_deviation })
}

/// Singular system of K with self-adjoint singular vectors, and the resulting
/// data λ_n = 1/σ_n, a_n = v_n, b_n = u_n.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub dim: usize,
    /// Descending.
    pub sigma: Vec<f64>,
    pub v: Vec<ComplexMatrix>,
    pub u: Vec<ComplexMatrix>,
    pub lambda: Vec<f64>,
    /// ‖K − Σ σ_n |u_n⟩⟨v_n|‖ entrywise max.
    pub k_residual: f64,
    /// Largest Hermiticity deviation of K(v_n)/σ_n before symmetrization.
    pub u_hermiticity: f64,
    /// max |⟨v_i, v_j⟩ − δ_ij| and likewise for u.
    pub orthonormality: f64,
    /// ‖L̃ − I − Σ λ_n |a_n⟩⟨b_n|‖ entrywise max, when L̃ is known.
    pub residual: Option<f64>,
}

impl SpectralDecomposition {
    pub fn a(&self) -> &[ComplexMatrix] {
        &self.v
    }

    pub fn b(&self) -> &[ComplexMatrix] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// I + Σ λ_n |a_n⟩⟨b_n| as a superoperator.
    pub fn reconstruct(&self) -> Superoperator {
        let nn = self.dim * self.dim;
        let mut m = ComplexMatrix::identity(nn);
        for ((a, b), &l) in self.v.iter().zip(&self.u).zip(&self.lambda) {
            let (va, vb) = (vectorize(a), vectorize(b));
            for i in 0..nn {
                for j in 0..nn {
                    m[(i, j)] += va[i] * vb[j].conj() * l;
                }
            }
        }
        Superoperator::from_matrix(m).expect("square")
    }
}

// Fix the sign of a Hermitian matrix deterministically: positive trace, else
// the first non-negligible diagonal entry positive, else the first
// non-negligible off-diagonal entry with positive real part.
fn canonical_sign(v: &ComplexMatrix) -> f64 {
    let n = v.rows();
    let eps = 1e-8 * v.frobenius_norm();
    let tr = v.trace().re;
    if tr.abs() > eps {
        return tr.signum();
    }
    for i in 0..n {
        if v[(i, i)].re.abs() > eps {
            return v[(i, i)].re.signum();
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let z = v[(i, j)];
            if z.norm() > eps {
                return if z.re.abs() > eps { z.re.signum() } else { z.im.signum() };
            }
        }
    }
    1.0
}

/// Orthonormal Hermitian basis (trace inner product, column-stacked) for the
/// dominant `size`-dimensional real span of the candidates.
///
/// Vectors are split into real and imaginary parts so the real inner product
/// becomes Euclidean; the left singular vectors of that real matrix are real
/// combinations of the candidates and hence Hermitian again. When a block sits
/// next to a nearly degenerate neighbour the candidates pick up a small
/// component outside the block; taking the dominant directions discards it.
fn hermitian_block_basis(candidates: &[Vec<C64>], size: usize, drop: f64) -> Result<Vec<Vec<C64>>> {
    let len = candidates[0].len();
    let r = ComplexMatrix::from_fn(2 * len, candidates.len(), |i, j| {
        let z = candidates[j][i % len];
        C64::new(if i < len { z.re } else { z.im }, 0.0)
    });
    let d = svd(&r)?;
    let found = d.sigma.iter().filter(|&&s| s > drop * d.sigma[0]).count();
    if found < size {
        return Err(Error::DegenerateBlock { expected: size, found });
    }
    Ok((0..size)
        .map(|j| {
            let w = (0..len).map(|i| C64::new(d.u[(i, j)].re, d.u[(i + len, j)].re));
            let w: Vec<C64> = w.collect();
            let nw = crate::matrix::vec_norm(&w);
            w.into_iter().map(|x| x / nw).collect()
        })
        .collect())
}

/// Self-adjoint singular value expansion K = Σ σ_n |u_n⟩⟨v_n|.
pub fn self_adjoint_sve(k: &Superoperator, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let n = k.dim();
    let nn = n * n;
    let star = k.hermiticity_preservation_deviation();
    if star > tol.star_preserving * k.matrix().max_abs().max(1.0) {
        return Err(Error::NotStarPreserving { deviation: star });
    }
    let ktk = &k.matrix().adjoint() * k.matrix();
    let es = hermitian_eig(&HermitianMatrix::from_hermitian_part(&ktk), tol)?;
    // descending
    let mu: Vec<f64> = es.eigenvalues.iter().rev().copied().collect();
    let vecs: Vec<Vec<C64>> = (0..nn).rev().map(|j| es.vectors.column(j)).collect();
    let sig: Vec<f64> = mu.iter().map(|&m| m.max(0.0).sqrt()).collect();

    let mut v_all: Vec<Vec<C64>> = Vec::with_capacity(nn);
    let mut start = 0;
    while start < nn {
        let mut end = start + 1;
        while end < nn && (sig[end - 1] - sig[end]).abs() <= tol.degeneracy * sig[start] {
            end += 1;
        }
        let size = end - start;
        let mut candidates = Vec::with_capacity(2 * size);
        for y in &vecs[start..end] {
            let ym = unvectorize(y)?;
            let yd = ym.adjoint();
            candidates.push(vectorize(&(&ym + &yd)));
            candidates.push(vectorize(&(&ym - &yd).scale(I)));
        }
        let basis = hermitian_block_basis(&candidates, size, tol.gram_schmidt_drop)?;
        // Re-diagonalize K†K on the block so the vectors are exact eigenvectors.
        let kv: Vec<Vec<C64>> = basis.iter().map(|b| ktk.mul_vec(b)).collect();
        let bmat = ComplexMatrix::from_fn(size, size, |i, j| C64::new(crate::matrix::dot(&basis[i], &kv[j]).re, 0.0));
        let bes = hermitian_eig(&HermitianMatrix::from_hermitian_part(&bmat), tol)?;
        for col in (0..size).rev() {
            let w: Vec<f64> = (0..size).map(|i| bes.vectors[(i, col)].re).collect();
            let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut v = vec![ZERO; nn];
            for (bj, &wj) in basis.iter().zip(&w) {
                for (x, y) in v.iter_mut().zip(bj) {
                    *x += y * (wj / wn);
                }
            }
            v_all.push(v);
        }
        start = end;
    }

    let mut sigma = Vec::with_capacity(nn);
    let mut v_out = Vec::with_capacity(nn);
    let mut u_out = Vec::with_capacity(nn);
    let mut u_hermiticity = 0.0f64;
    for v in v_all {
        let mut vm = unvectorize(&v)?.hermitian_part();
        vm = vm.scale_real(canonical_sign(&vm));
        let kv = k.apply(&vm)?;
        let s = kv.frobenius_norm();
        if s == 0.0 {
            return Err(Error::IllConditioned { smallest_singular_value: 0.0 });
        }
        let um = kv.scale_real(1.0 / s);
        u_hermiticity = u_hermiticity.max(um.hermiticity_deviation());
        sigma.push(s);
        v_out.push(vm);
        u_out.push(um.hermitian_part());
    }
    if u_hermiticity > tol.star_preserving {
        return Err(Error::NotStarPreserving { deviation: u_hermiticity });
    }
    // Sort by σ descending (re-diagonalization may have reordered within blocks).
    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| sigma[i]).collect();
    let v: Vec<ComplexMatrix> = order.iter().map(|&i| v_out[i].clone()).collect();
    let u: Vec<ComplexMatrix> = order.iter().map(|&i| u_out[i].clone()).collect();

    let mut orthonormality = 0.0f64;
    for fam in [&v, &u] {
        for i in 0..nn {
            for j in 0..nn {
                let g = hs_inner(&fam[i], &fam[j])?;
                let target = if i == j { ONE } else { ZERO };
                orthonormality = orthonormality.max((g - target).norm());
            }
        }
    }
    let mut krec = ComplexMatrix::zeros(nn, nn);
    for ((uu, vv), &s) in u.iter().zip(&v).zip(&sigma) {
        let (a, b) = (vectorize(uu), vectorize(vv));
        for i in 0..nn {
            for j in 0..nn {
                krec[(i, j)] += a[i] * b[j].conj() * s;
            }
        }
    }
    let k_residual = krec.max_abs_diff(k.matrix());
    let lambda = sigma.iter().map(|s| 1.0 / s).collect();
    Ok(SpectralDecomposition { dim: n, sigma, v, u, lambda, k_residual, u_hermiticity, orthonormality, residual: None })
}

/// Resolvent, self-adjoint SVE and reconstruction residual in one step.
pub fn decompose(l_tilde: &Superoperator, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let r = resolvent_k(l_tilde, tol)?;
    let mut d = self_adjoint_sve(&r.k, tol)?;
    d.residual = Some(d.reconstruct().matrix().max_abs_diff(l_tilde.matrix()));
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// (Id − T_e)† M (Id − T_e)
    #[default]
    Minus,
    /// (Id + T_e)† M (Id + T_e)
    Plus,
}

/// Σ λ_n M_{b_n} ⊗ a_n on S₂(H) ⊗ H, basis index vec(y)·n + h.
pub fn tensor_operator(decomp: &SpectralDecomposition) -> ComplexMatrix {
    let n = decomp.dim;
    let id = ComplexMatrix::identity(n);
    let n3 = n * n * n;
    let mut m = ComplexMatrix::zeros(n3, n3);
    for ((a, b), &l) in decomp.v.iter().zip(&decomp.u).zip(&decomp.lambda) {
        m += &b.transpose().kron(&id).kron(a).scale_real(l);
    }
    m
}

/// The contraction y ⊗ h ↦ y(h), an n x n³ matrix.
pub fn contraction(n: usize) -> ComplexMatrix {
    let mut c = ComplexMatrix::zeros(n, n * n * n);
    for i in 0..n {
        for j in 0..n {
            c[(i, (j * n + i) * n + j)] = ONE;
        }
    }
    c
}

/// T_e(y ⊗ h) = |y(h)⟩⟨e| ⊗ e
pub fn t_e(n: usize, e: &[C64]) -> ComplexMatrix {
    let ec: Vec<C64> = e.iter().map(|z| z.conj()).collect();
    let lift =
        ComplexMatrix::column_vector(&ec).kron(&ComplexMatrix::identity(n)).kron(&ComplexMatrix::column_vector(e));
    &lift * &contraction(n)
}

#[derive(Clone, Debug)]
pub struct CcpReport {
    pub convention: SignConvention,
    pub e: Vec<C64>,
    pub sandwich_min: f64,
    /// Minimum eigenvalue of M restricted to the kernel of the contraction.
    pub kernel_min: f64,
    /// Spectral norm of M.
    pub m_norm: f64,
    pub ccp: bool,
}

fn min_eig(m: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eig(&HermitianMatrix::from_hermitian_part(m), tol)?.min())
}

/// Conditional complete positivity of L̃ − I via the sandwiched tensor
/// operator, cross-checked by projecting M onto the kernel of the contraction.
pub fn ccp_test(
    decomp: &SpectralDecomposition,
    e: &[C64],
    convention: SignConvention,
    tol: &Tolerances,
) -> Result<CcpReport> {
    let n = decomp.dim;
    if e.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: e.len() });
    }
    let norm = crate::matrix::vec_norm(e);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector { norm });
    }
    let m = tensor_operator(decomp);
    let mes = hermitian_eig(&HermitianMatrix::from_hermitian_part(&m), tol)?;
    let m_norm = mes.spectral_norm();
    let n3 = n * n * n;
    let te = t_e(n, e);
    let id = ComplexMatrix::identity(n3);
    let side = match convention {
        SignConvention::Minus => &id - &te,
        SignConvention::Plus => &id + &te,
    };
    let s = &(&side.adjoint() * &m) * &side;
    let sandwich_min = min_eig(&s, tol)?;

    let c = contraction(n);
    let p = &id - &(&c.adjoint() * &c).scale_real(1.0 / n as f64);
    let pes = hermitian_eig(&HermitianMatrix::from_hermitian_part(&p), tol)?;
    let cols: Vec<Vec<C64>> = (0..n3).filter(|&j| pes.eigenvalues[j] > 0.5).map(|j| pes.vector(j)).collect();
    let kernel_min = if cols.is_empty() {
        0.0
    } else {
        let q = ComplexMatrix::from_columns(n3, &cols);
        min_eig(&(&(&q.adjoint() * &m) * &q), tol)?
    };
    let thr = -tol.ccp * m_norm;
    let (a, b) = (sandwich_min >= thr, kernel_min >= thr);
    if a != b {
        return Err(Error::CcpInconsistent { sandwich_min, kernel_min });
    }
    Ok(CcpReport { convention, e: e.to_vec(), sandwich_min, kernel_min, m_norm, ccp: a })
}

/// The matrix units |i⟩⟨j|, ordered column-stacked.
pub fn matrix_unit_basis(n: usize) -> Vec<ComplexMatrix> {
    (0..n * n).map(|k| ComplexMatrix::unit(n, k % n, k / n)).collect()
}

/// E'_k = Σ_j w_jk E_j for a unitary w of size n².
pub fn rotate_basis(basis: &[ComplexMatrix], w: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let n = basis[0].rows();
    (0..basis.len())
        .map(|k| {
            let mut e = ComplexMatrix::zeros(n, n);
            for (j, b) in basis.iter().enumerate() {
                e += &b.scale(w[(j, k)]);
            }
            e
        })
        .collect()
}

/// ‖Σ_k E_k A E_k† − Tr(A) I‖₂
pub fn trace_identity_residual(basis: &[ComplexMatrix], a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = ComplexMatrix::identity(n).scale(-a.trace());
    for e in basis {
        s += &(&(e * a) * &e.adjoint());
    }
    s.frobenius_norm()
}

#[derive(Clone, Debug)]
pub struct Jump {
    pub y: ComplexMatrix,
    pub rate: f64,
    /// (n, sign of the a-part, sign of the b-part, k)
    pub source: (usize, i8, i8, usize),
}

#[derive(Clone, Debug)]
pub struct GkslForm {
    pub jumps: Vec<Jump>,
    /// Jump count before pruning.
    pub unpruned: usize,
    /// max_x ‖L(x) − Σ λ′(y x y† − ½{y y†, x})‖₂ over matrix units, after pruning.
    pub residual: f64,
    /// Same, before pruning.
    pub residual_unpruned: f64,
    pub worst_basis: (usize, usize),
    /// max_x ‖L(x) − x − Σ λ′ y x y†‖₂
    pub direct_residual: f64,
    /// ‖Σ λ′ y y† + I‖₂
    pub sum_residual: f64,
}

impl GkslForm {
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        apply_jumps(&self.jumps, x)
    }
}

fn apply_jumps(jumps: &[Jump], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for j in jumps {
        let yd = j.y.adjoint();
        let yy = &j.y * &yd;
        let term = &(&(&j.y * x) * &yd) - &(&(&yy * x) + &(x * &yy)).scale_real(0.5);
        out += &term.scale_real(j.rate);
    }
    out
}

fn generator_residual(jumps: &[Jump], l: &Superoperator) -> Result<(f64, (usize, usize))> {
    let n = l.dim();
    let mut worst = (0.0f64, (0, 0));
    for i in 0..n {
        for j in 0..n {
            let x = ComplexMatrix::unit(n, i, j);
            let r = l.apply(&x)?.distance(&apply_jumps(jumps, &x));
            if r > worst.0 {
                worst = (r, (i, j));
            }
        }
    }
    Ok(worst)
}

/// Rebuilds jump operators y = ρ^{−1/4} √c E_k √d ρ^{1/4} with signed rates
/// from the positive/negative parts of a_n and b_n, and checks them against L.
pub fn gksl_reconstruct(
    decomp: &SpectralDecomposition,
    rho: &DensityMatrix,
    l: &Superoperator,
    basis: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<GkslForm> {
    let n = decomp.dim;
    let nq = rho.neg_quarter()?;
    let q = rho.quarter();
    let sqrt_part = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        let es = hermitian_eig(&HermitianMatrix::from_hermitian_part(m), tol)?;
        Ok(es.map(|x| x.max(0.0).sqrt()))
    };
    let mut jumps = Vec::new();
    for (idx, ((a, b), &lam)) in decomp.v.iter().zip(&decomp.u).zip(&decomp.lambda).enumerate() {
        let (ap, am) = psd_parts(&HermitianMatrix::from_hermitian_part(a), tol)?;
        let (bp, bm) = psd_parts(&HermitianMatrix::from_hermitian_part(b), tol)?;
        let keep = |m: &ComplexMatrix, whole: &ComplexMatrix| m.max_abs() > tol.psd_clip * whole.max_abs();
        let a_parts: Vec<(ComplexMatrix, i8)> = [(ap, 1i8), (am, -1)].into_iter().filter(|(m, _)| keep(m, a)).collect();
        let b_parts: Vec<(ComplexMatrix, i8)> = [(bp, 1i8), (bm, -1)].into_iter().filter(|(m, _)| keep(m, b)).collect();
        for (c, sa) in &a_parts {
            let left = nq * &sqrt_part(c)?;
            for (d, sb) in &b_parts {
                let right = &sqrt_part(d)? * q;
                for (k, e) in basis.iter().enumerate() {
                    let y = &(&left * e) * &right;
                    jumps.push(Jump { y, rate: lam * f64::from(*sa) * f64::from(*sb), source: (idx, *sa, *sb, k) });
                }
            }
        }
    }
    let unpruned = jumps.len();
    let (residual_unpruned, _) = generator_residual(&jumps, l)?;
    jumps.retain(|j| j.rate.abs() * j.y.frobenius_norm().powi(2) > tol.jump_prune);
    let (residual, worst_basis) = generator_residual(&jumps, l)?;

    let mut direct_residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = ComplexMatrix::unit(n, i, j);
            let mut s = x.clone();
            for jp in &jumps {
                s += &(&(&jp.y * &x) * &jp.y.adjoint()).scale_real(jp.rate);
            }
            direct_residual = direct_residual.max(l.apply(&x)?.distance(&s));
        }
    }
    let mut sum = ComplexMatrix::identity(n);
    for jp in &jumps {
        sum += &(&jp.y * &jp.y.adjoint()).scale_real(jp.rate);
    }
    let sum_residual = sum.frobenius_norm();

    let l_scale = l.s2_norm()?.max(1.0);
    if residual > 1e-6 * l_scale {
        return Err(Error::ReconstructionFailure { residual, worst_basis });
    }
    Ok(GkslForm { jumps, unpruned, residual, residual_unpruned, worst_basis, direct_residual, sum_residual })
}

/// ‖I + Σ λ_n ⟨b_n, ρ^{1/2}⟩ i_ρ⁻¹(a_n)‖₂
pub fn identity_residual(decomp: &SpectralDecomposition, rho: &DensityMatrix) -> Result<f64> {
    let n = decomp.dim;
    let nq = rho.neg_quarter()?;
    let mut s = ComplexMatrix::identity(n);
    for ((a, b), &lam) in decomp.v.iter().zip(&decomp.u).zip(&decomp.lambda) {
        let c = hs_inner(b, rho.half())? * lam;
        s += &(&(nq * a) * nq).scale(c);
    }
    Ok(s.frobenius_norm())
}
