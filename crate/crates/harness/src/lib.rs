//! Batch driver for `qms-core`: JSON problem specs in, verdict reports out.

pub mod decomposition;
pub mod generate;
pub mod json;
pub mod report;
pub mod run;
pub mod spec;

pub use report::{emit, CheckResult, Format, Report, Verdict};
pub use run::{run, RunError, RunOptions};
pub use spec::{emit_spec, parse_spec, CheckName, ProblemSpec, SpecError};

/// Environment variable holding the default `--tol-scale`.
pub const TOL_SCALE_ENV: &str = "QMS_TOL_SCALE";
