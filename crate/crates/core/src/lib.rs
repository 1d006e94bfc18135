#![no_std]

extern crate alloc;

pub mod error;
pub mod induced;
pub mod instances;
pub mod linalg;
pub mod matrix;
pub mod random;
pub mod semigroup;
pub mod spectral;
pub mod state;
pub mod superop;
pub mod tolerance;

pub use error::{Error, Result};
pub use linalg::{EigenSystem, HermitianMatrix, SchattenP};
pub use matrix::{ComplexMatrix, C64};
pub use semigroup::{exponentiate, Generator, Provenance};
pub use spectral::{SignConvention, SpectralDecomposition};
pub use state::DensityMatrix;
pub use superop::{CheckReport, Superoperator, Verdict, Witness, VECTORIZATION};
pub use tolerance::Tolerances;
