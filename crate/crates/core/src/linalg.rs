//! Dense kernels: Jacobi eigensolver, one-sided Jacobi SVD, pseudoinverse,
//! fractional powers, Schatten norms, matrix exponential.

use alloc::vec::Vec;

// Float math lives in std; in no_std builds these methods come from num-traits.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{real, ComplexMatrix, C64, ZERO};
use crate::tolerance::Tolerances;

/// A matrix that passed the Hermiticity check.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `a` if max |A_ij - conj(A_ji)| <= tol * max(1, max |A_ij|), then
    /// symmetrizes it exactly.
    pub fn new(a: ComplexMatrix, tol: f64) -> Result<Self> {
        a.require_square()?;
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let dev = a.hermiticity_deviation();
        if dev > tol * a.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self(a.hermitian_part()))
    }

    /// Hermitian part of `a`, no check.
    pub fn from_hermitian_part(a: &ComplexMatrix) -> Self {
        Self(a.hermitian_part())
    }

    pub fn real_diag(d: &[f64]) -> Self {
        Self(ComplexMatrix::real_diag(d))
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

impl core::ops::Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// V f(Λ) V†
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.vectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * v[(j, k)].conj() * fl[k]).sum())
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Largest |λ|, i.e. the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

// One Hermitian Jacobi rotation: the 2x2 data (a_pp, a_qq, a_pq) gives
// (c, s, e^{-iφ}, t) with J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] zeroing a_pq.
#[inline]
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, f64, C64, f64) {
    let g = apq.norm();
    let phase_conj = (apq / g).conj();
    let zeta = (aqq - app) / (2.0 * g);
    let t = if zeta.abs() > 1e150 {
        0.5 / zeta
    } else if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c, phase_conj, t)
}

// Columns p, q of `m` ← (c·m_p − s·ē·m_q, s·m_p + c·ē·m_q), ē = e^{-iφ}.
#[inline]
fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, ph: C64) {
    for k in 0..m.rows() {
        let (mp, mq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = mp * c - mq * ph * s;
        m[(k, q)] = mp * s + mq * ph * c;
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &HermitianMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    let off = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let threshold = tol.eig_offdiag * scale;
    let mut sweeps = 0;
    let mut residual = off(&m);
    while residual > threshold {
        if sweeps == tol.eig_max_sweeps {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == ZERO {
                    continue;
                }
                let (app, aqq) = (m[(p, p)].re, m[(q, q)].re);
                let (c, s, ph, t) = jacobi_rotation(app, aqq, apq);
                let g = apq.norm();
                rotate_columns(&mut m, p, q, c, s, ph);
                let phc = ph.conj();
                for k in 0..n {
                    let (rp, rq) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = rp * c - rq * phc * s;
                    m[(q, k)] = rp * s + rq * phc * c;
                }
                m[(p, p)] = real(app - t * g);
                m[(q, q)] = real(aqq + t * g);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                rotate_columns(&mut v, p, q, c, s, ph);
            }
        }
        sweeps += 1;
        residual = off(&m);
        if !residual.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenSystem { eigenvalues, vectors })
}

/// Thin singular value decomposition A = U diag(σ) V†, σ descending.
///
/// For an m x n matrix with m >= n, `u` is m x n and `v` is n x n (so the
/// columns of `v` with zero σ span the null space). Wide matrices go through
/// the transpose, giving `u` m x m and `v` n x m.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

const SVD_MAX_SWEEPS: usize = 100;
const SVD_ORTHO_TOL: f64 = 1e-15;

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    if a.rows() < a.cols() {
        let s = svd(&a.adjoint())?;
        return Ok(Svd { u: s.v, sigma: s.sigma, v: s.u });
    }
    let (m, n) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let mut converged = n < 2;
    let mut worst = 0.0f64;
    // Columns below this squared norm are numerically zero; rotating them only
    // shuffles rounding noise.
    let negligible = a.frobenius_norm().powi(2) * 1e-32;
    for _ in 0..SVD_MAX_SWEEPS {
        worst = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..m {
                    let (wp, wq) = (w[(k, p)], w[(k, q)]);
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                let scale = alpha.sqrt() * beta.sqrt();
                if g == 0.0 || alpha <= negligible || beta <= negligible || g <= SVD_ORTHO_TOL * scale {
                    continue;
                }
                worst = worst.max(g / scale);
                let (c, s, ph, _) = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, c, s, ph);
                rotate_columns(&mut v, p, q, c, s, ph);
            }
        }
        if worst == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: SVD_MAX_SWEEPS, residual: worst });
    }
    let norms: Vec<f64> = (0..n).map(|j| (0..m).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = ComplexMatrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            w[(i, j)] / norms[j]
        } else {
            ZERO
        }
    });
    let v = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Svd { u, sigma, v })
}

/// Moore–Penrose inverse, dropping singular values <= cutoff * σ_max.
pub fn moore_penrose(x: &ComplexMatrix, cutoff: f64) -> Result<ComplexMatrix> {
    let s = svd(x)?;
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let mut out = ComplexMatrix::zeros(x.cols(), x.rows());
    for (k, &sk) in s.sigma.iter().enumerate() {
        if sk <= cutoff * smax || sk == 0.0 {
            continue;
        }
        for i in 0..x.cols() {
            let vik = s.v[(i, k)] / sk;
            for j in 0..x.rows() {
                out[(i, j)] += vik * s.u[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Orthonormal basis (as columns) of the null space of a square or tall matrix,
/// using singular values <= threshold.
pub fn null_space(a: &ComplexMatrix, threshold: f64) -> Result<(ComplexMatrix, Vec<f64>)> {
    let padded;
    let a = if a.rows() < a.cols() {
        let mut p = ComplexMatrix::zeros(a.cols(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                p[(i, j)] = a[(i, j)];
            }
        }
        padded = p;
        &padded
    } else {
        a
    };
    let s = svd(a)?;
    let idx: Vec<usize> = (0..s.sigma.len()).filter(|&k| s.sigma[k] <= threshold).collect();
    let basis = ComplexMatrix::from_fn(a.cols(), idx.len(), |i, k| s.v[(i, idx[k])]);
    Ok((basis, s.sigma))
}

/// A^p for PSD A via the eigendecomposition, with small negative eigenvalues
/// clipped to zero.
pub fn fractional_power(a: &HermitianMatrix, p: f64, tol: &Tolerances) -> Result<HermitianMatrix> {
    let es = hermitian_eig(a, tol)?;
    fractional_power_from(&es, p, tol)
}

/// Same as [`fractional_power`] on a precomputed eigensystem.
pub fn fractional_power_from(es: &EigenSystem, p: f64, tol: &Tolerances) -> Result<HermitianMatrix> {
    let norm = es.spectral_norm();
    let lmin = es.min();
    if lmin < -tol.psd_clip * norm {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: lmin });
    }
    if p < 0.0 && lmin <= tol.faithful {
        return Err(Error::Singular { min_eigenvalue: lmin });
    }
    let m = es.map(|l| {
        let l = l.max(0.0);
        if p == 0.0 {
            1.0
        } else if l == 0.0 {
            0.0
        } else {
            l.powf(p)
        }
    });
    Ok(HermitianMatrix::from_hermitian_part(&m))
}

/// Positive and negative parts A = A⁺ − A⁻, both PSD.
pub fn psd_parts(a: &HermitianMatrix, tol: &Tolerances) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let es = hermitian_eig(a, tol)?;
    Ok((es.map(|l| l.max(0.0)), es.map(|l| (-l).max(0.0))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Inf,
}

impl TryFrom<f64> for SchattenP {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(SchattenP::One)
        } else if p == 2.0 {
            Ok(SchattenP::Two)
        } else if p == f64::INFINITY {
            Ok(SchattenP::Inf)
        } else {
            Err(Error::UnsupportedNorm { p })
        }
    }
}

pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(svd(x)?.sigma)
}

pub fn schatten_norm(x: &ComplexMatrix, p: SchattenP) -> Result<f64> {
    match p {
        SchattenP::Two => Ok(x.frobenius_norm()),
        SchattenP::One => Ok(singular_values(x)?.iter().sum()),
        SchattenP::Inf => operator_norm(x),
    }
}

/// Largest singular value.
pub fn operator_norm(x: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(x)?.first().copied().unwrap_or(0.0))
}

/// Trace norm of a Hermitian matrix, Σ|λ|.
pub fn trace_norm_hermitian(a: &HermitianMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eig(a, tol)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// ⟨x, y⟩ = Tr(x† y)
pub fn hs_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
    if (x.rows(), x.cols()) != (y.rows(), y.cols()) {
        return Err(Error::DimensionMismatch { expected: x.rows() * x.cols(), found: y.rows() * y.cols() });
    }
    Ok(x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a.conj() * b).sum())
}

const TAYLOR_ORDER: usize = 16;
const MAX_SQUARINGS: i32 = 1000;

/// e^{tM} by scaling and squaring with a degree-16 Taylor polynomial.
pub fn expm(m: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    if t == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let norm = m.norm_one() * t.abs();
    if !norm.is_finite() {
        return Err(Error::ScalingFailure { norm_times_t: norm });
    }
    let mut k = 0i32;
    if norm > 0.5 {
        k = (norm / 0.5).log2().ceil() as i32;
        while norm / 2f64.powi(k) > 0.5 {
            k += 1;
        }
    }
    if k > MAX_SQUARINGS {
        return Err(Error::ScalingFailure { norm_times_t: norm });
    }
    let x = m.scale_real(t / 2f64.powi(k));
    let id = ComplexMatrix::identity(n);
    let mut acc = id.clone();
    for j in (1..=TAYLOR_ORDER).rev() {
        acc = &id + &(&x * &acc).scale_real(1.0 / j as f64);
    }
    for _ in 0..k {
        acc = &acc * &acc;
    }
    if !acc.is_finite() {
        return Err(Error::ScalingFailure { norm_times_t: norm });
    }
    Ok(acc)
}

/// Gram–Schmidt orthonormalization of the columns of `a` (complex), dropping
/// columns whose residual falls below `drop` times their original norm.
pub fn orthonormalize_columns(a: &ComplexMatrix, drop: f64) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let n0 = crate::matrix::vec_norm(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = crate::matrix::dot(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nv = crate::matrix::vec_norm(&v);
        if nv > drop * n0 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    ComplexMatrix::from_columns(a.rows(), &basis)
}
