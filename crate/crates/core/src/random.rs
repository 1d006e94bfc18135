//! Seeded random matrices. Everything here is reproducible bit-for-bit from a
//! `u64` seed.

use alloc::vec::Vec;

// Float math lives in std; in no_std builds these methods come from num-traits.
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::orthonormalize_columns;
use crate::matrix::{c64, ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Complex Ginibre matrix (entries of unit variance).
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Haar-distributed unitary via Gram–Schmidt on a Ginibre matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    loop {
        let q = orthonormalize_columns(&ginibre(rng, n, n), 1e-8);
        if q.cols() == n {
            return q;
        }
    }
}

/// G G† for a Ginibre G with `rank` columns.
pub fn psd(rng: &mut impl Rng, n: usize, rank: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, rank);
    &g * &g.adjoint()
}

/// Full-rank density matrix from the Hilbert–Schmidt ensemble.
pub fn density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let p = psd(rng, n, n);
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}

pub fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}
