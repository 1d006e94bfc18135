use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical kernels and the semigroup constructions.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NotSquare {
        rows: usize,
        cols: usize,
    },
    NotHermitian {
        deviation: f64,
    },
    NotPositiveSemidefinite {
        min_eigenvalue: f64,
    },
    /// A negative power was requested of an operator with a (near-)zero eigenvalue.
    Singular {
        min_eigenvalue: f64,
    },
    NoConvergence {
        sweeps: usize,
        residual: f64,
    },
    UnsupportedNorm {
        p: f64,
    },
    NotPerfectSquare {
        len: usize,
    },
    TraceNotOne {
        trace: f64,
    },
    NotFaithful {
        min_eigenvalue: f64,
    },
    NotHermiticityPreserving {
        deviation: f64,
    },
    IllConditioned {
        smallest_singular_value: f64,
    },
    NotStarPreserving {
        deviation: f64,
    },
    NotUnitVector {
        norm: f64,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    EmptyIndexSet,
    NegativeTime {
        t: f64,
    },
    ScalingFailure {
        norm_times_t: f64,
    },
    NonFinite,
    Precondition(&'static str),
    /// The finite-difference derivative estimates did not settle.
    EstimatorNonConvergence {
        extrapolation_error: f64,
        raw: Vec<f64>,
    },
    /// The sandwiched and kernel-projected ccp verdicts disagree.
    CcpInconsistent {
        sandwich_min: f64,
        kernel_min: f64,
    },
    ReconstructionFailure {
        residual: f64,
        worst_basis: (usize, usize),
    },
    /// Self-adjoint basis construction produced the wrong number of vectors for a block.
    DegenerateBlock {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (max deviation {deviation:e})")
            }
            Error::NotPositiveSemidefinite { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")
            }
            Error::Singular { min_eigenvalue } => {
                write!(f, "negative power of a singular matrix (min eigenvalue {min_eigenvalue:e})")
            }
            Error::NoConvergence { sweeps, residual } => {
                write!(f, "no convergence after {sweeps} sweeps (off-diagonal residual {residual:e})")
            }
            Error::UnsupportedNorm { p } => write!(f, "unsupported Schatten exponent {p}"),
            Error::NotPerfectSquare { len } => write!(f, "length {len} is not a perfect square"),
            Error::TraceNotOne { trace } => write!(f, "trace {trace} differs from one"),
            Error::NotFaithful { min_eigenvalue } => {
                write!(f, "state is not faithful (min eigenvalue {min_eigenvalue:e})")
            }
            Error::NotHermiticityPreserving { deviation } => {
                write!(f, "map does not preserve Hermiticity (deviation {deviation:e})")
            }
            Error::IllConditioned { smallest_singular_value } => write!(
                f,
                "resolvent point too close to the spectrum (smallest singular value {smallest_singular_value:e})"
            ),
            Error::NotStarPreserving { deviation } => {
                write!(f, "operator is not star-preserving (deviation {deviation:e})")
            }
            Error::NotUnitVector { norm } => write!(f, "vector has norm {norm}, expected 1"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::EmptyIndexSet => f.write_str("index set is empty"),
            Error::NegativeTime { t } => write!(f, "negative time {t} without analytic continuation"),
            Error::ScalingFailure { norm_times_t } => {
                write!(f, "scaling and squaring failed for |tL| = {norm_times_t:e}")
            }
            Error::NonFinite => f.write_str("non-finite value encountered"),
            Error::Precondition(what) => write!(f, "precondition violated: {what}"),
            Error::EstimatorNonConvergence { extrapolation_error, .. } => {
                write!(f, "finite-difference estimator did not converge (extrapolation error {extrapolation_error:e})")
            }
            Error::CcpInconsistent { sandwich_min, kernel_min } => write!(
                f,
                "ccp verdicts disagree: sandwich min eigenvalue {sandwich_min:e}, kernel min eigenvalue {kernel_min:e}"
            ),
            Error::ReconstructionFailure { residual, worst_basis } => write!(
                f,
                "reconstruction residual {residual:e} at basis element ({}, {})",
                worst_basis.0, worst_basis.1
            ),
            Error::DegenerateBlock { expected, found } => {
                write!(f, "self-adjoint basis construction produced {found} vectors, expected {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}
