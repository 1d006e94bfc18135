//! Report types and their JSON / text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::spec::{CheckName, JsonMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotFalsified,
    SkippedHypothesis,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotFalsified => "not-falsified",
            Self::SkippedHypothesis => "skipped-hypothesis",
        }
    }

    /// Pass or not-falsified: good enough to serve as a hypothesis.
    pub fn holds(self) -> bool {
        matches!(self, Self::Pass | Self::NotFalsified)
    }
}

impl From<qms_core::Verdict> for Verdict {
    fn from(v: qms_core::Verdict) -> Self {
        match v {
            qms_core::Verdict::Pass => Self::Pass,
            qms_core::Verdict::Fail => Self::Fail,
            qms_core::Verdict::NotFalsified => Self::NotFalsified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessJson {
    /// An input on which the checked inequality fails.
    Input { matrix: JsonMatrix },
    /// Eigenvector of a negative eigenvalue (e.g. of the Choi matrix).
    Eigenvector { vector: Vec<[f64; 2]> },
}

impl From<&qms_core::Witness> for WitnessJson {
    fn from(w: &qms_core::Witness) -> Self {
        match w {
            qms_core::Witness::Input(m) => Self::Input { matrix: JsonMatrix::from_matrix(m) },
            qms_core::Witness::Eigenvector(v) => Self::Eigenvector { vector: v.iter().map(|z| [z.re, z.im]).collect() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: CheckName,
    pub verdict: Verdict,
    pub residuals: BTreeMap<String, f64>,
    /// Basis, sign-convention and similar provenance.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Set only when the run asked for timing, which makes reports nondeterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl CheckResult {
    pub fn new(name: CheckName, verdict: Verdict) -> Self {
        Self {
            name,
            verdict,
            residuals: BTreeMap::new(),
            provenance: BTreeMap::new(),
            witness: None,
            reason: None,
            error: None,
            timing_ms: None,
        }
    }

    pub fn skipped(name: CheckName, reason: impl Into<String>) -> Self {
        Self { reason: Some(reason.into()), ..Self::new(name, Verdict::SkippedHypothesis) }
    }

    pub fn residual(mut self, key: &str, value: f64) -> Self {
        self.residuals.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.provenance.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateReport {
    /// "given" or "derived"
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub vectorization: &'static str,
    pub dim: usize,
    pub seed: u64,
    pub sign_convention: &'static str,
    pub tolerance_scale: f64,
    pub times: Vec<f64>,
    pub state: StateReport,
    pub checks: Vec<CheckResult>,
    /// 0 all pass / not-falsified / skipped, 1 some fail, 3 numeric failure.
    pub exit_code: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

pub fn emit(report: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Json => crate::json::to_bytes(report),
        Format::Text => render_text(report).into_bytes(),
    }
}

fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "dim {}  seed {}  vectorization {}  sign convention {}  tolerance scale {:e}",
        r.dim, r.seed, r.vectorization, r.sign_convention, r.tolerance_scale
    );
    let _ = write!(s, "state: {}", r.state.source);
    if let Some(why) = &r.state.rejection {
        let _ = write!(s, " (rejected: {why})");
    }
    s.push('\n');
    for c in &r.checks {
        let _ = write!(s, "{:<14} {:<19}", c.name.as_str(), c.verdict.as_str());
        for (k, v) in &c.residuals {
            if v.fract() == 0.0 && v.abs() < 1e15 {
                let _ = write!(s, " {k}={v}");
            } else {
                let _ = write!(s, " {k}={v:.6e}");
            }
        }
        for (k, v) in &c.provenance {
            let _ = write!(s, " {k}={v}");
        }
        if let Some(t) = c.timing_ms {
            let _ = write!(s, " [{t:.1} ms]");
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        if let Some(reason) = &c.reason {
            let _ = writeln!(s, "{:<14} reason: {reason}", "");
        }
        if let Some(err) = &c.error {
            let _ = writeln!(s, "{:<14} error: {err}", "");
        }
    }
    let count = |v: Verdict| r.checks.iter().filter(|c| c.verdict == v).count();
    let _ = writeln!(
        s,
        "summary: {} pass, {} fail, {} not-falsified, {} skipped-hypothesis",
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::NotFalsified),
        count(Verdict::SkippedHypothesis)
    );
    s
}
