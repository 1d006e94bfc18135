//! Central numerical tolerances.
//!
//! Every threshold used by the kernels and checks lives here so that callers
//! (and the batch harness) can override or uniformly rescale them.

/// Numerical thresholds. Relative thresholds are multiplied by the norm named
/// in their doc comment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |A_ij - conj(A_ji)|, relative to max(1, max |A_ij|).
    pub hermiticity: f64,
    /// Jacobi stop criterion: off-diagonal Frobenius norm relative to the matrix norm.
    pub eig_offdiag: f64,
    pub eig_max_sweeps: usize,
    /// Eigenvalues in [-psd_clip * |A|, 0) are rounded to zero in PSD operations.
    pub psd_clip: f64,
    /// Singular values at or below `pinv_cutoff * sigma_max` are treated as zero.
    pub pinv_cutoff: f64,
    /// A state is faithful when its smallest eigenvalue exceeds this.
    pub faithful: f64,
    /// Trace of a density matrix must be within this of one.
    pub trace: f64,
    /// Choi min eigenvalue must be >= -cp * max(1, |C|_F).
    pub cp: f64,
    /// Sampled positivity / Schwarz checks: min eigenvalue >= -positivity.
    pub positivity: f64,
    pub unital: f64,
    /// Invariance / subinvariance residual threshold (trace norm, resp. eigenvalue).
    pub invariance: f64,
    /// Hermiticity preservation T(x*) = T(x)* on the matrix-unit basis.
    pub hermiticity_preserving: f64,
    pub schwarz_samples: usize,
    pub positivity_samples: usize,
    /// Relative spacing below which singular values are grouped into one block.
    pub degeneracy: f64,
    /// Directions whose weight falls below this (relative) are treated as absent
    /// when building self-adjoint bases for singular blocks.
    pub gram_schmidt_drop: f64,
    /// Smallest admissible singular value of (L~ - I).
    pub resolvent_gap: f64,
    /// Star-preservation residual on the matrix-unit basis.
    pub star_preserving: f64,
    /// ccp verdict threshold, relative to |M|.
    pub ccp: f64,
    /// Null-space threshold, relative to max(1, sigma_max).
    pub null_space: f64,
    /// Jumps with |rate| * |y|_2^2 at or below this are pruned.
    pub jump_prune: f64,
    /// Base finite-difference step for extended-generator estimates.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            eig_offdiag: 1e-13,
            eig_max_sweeps: 100,
            psd_clip: 1e-10,
            pinv_cutoff: 1e-10,
            faithful: 1e-8,
            trace: 1e-10,
            cp: 1e-10,
            positivity: 1e-10,
            unital: 1e-10,
            invariance: 1e-10,
            hermiticity_preserving: 1e-10,
            schwarz_samples: 200,
            positivity_samples: 200,
            degeneracy: 1e-8,
            gram_schmidt_drop: 1e-10,
            resolvent_gap: 1e-8,
            star_preserving: 1e-9,
            ccp: 1e-8,
            null_space: 1e-9,
            jump_prune: 1e-12,
            fd_step: 1e-3,
        }
    }
}

impl Tolerances {
    /// Multiplies every acceptance threshold by `factor`.
    ///
    /// Iteration caps, sample counts, the finite-difference step and the
    /// Jacobi stopping criterion are left untouched; they steer algorithms
    /// rather than verdicts.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            hermiticity: self.hermiticity * factor,
            psd_clip: self.psd_clip * factor,
            pinv_cutoff: self.pinv_cutoff * factor,
            faithful: self.faithful * factor,
            trace: self.trace * factor,
            cp: self.cp * factor,
            positivity: self.positivity * factor,
            unital: self.unital * factor,
            invariance: self.invariance * factor,
            hermiticity_preserving: self.hermiticity_preserving * factor,
            degeneracy: self.degeneracy * factor,
            gram_schmidt_drop: self.gram_schmidt_drop * factor,
            resolvent_gap: self.resolvent_gap * factor,
            star_preserving: self.star_preserving * factor,
            ccp: self.ccp * factor,
            null_space: self.null_space * factor,
            jump_prune: self.jump_prune * factor,
            ..*self
        }
    }
}
