//! Problem specs: the JSON input format and its validation into numerical objects.

use std::fmt;

use qms_core::matrix::c64;
use qms_core::{ComplexMatrix, DensityMatrix, Generator, Superoperator, Tolerances};
use serde::{Deserialize, Serialize};

/// Row-major nested array of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(pub Vec<Vec<[f64; 2]>>);

impl JsonMatrix {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self((0..m.rows()).map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect())
    }

    fn to_matrix(&self, path: &str, rows: usize, cols: usize) -> Result<ComplexMatrix, SpecError> {
        let found_cols = self.0.first().map_or(0, Vec::len);
        if self.0.len() != rows || self.0.iter().any(|r| r.len() != cols) {
            return Err(SpecError::field(
                path,
                format!(
                    "expected a {rows}x{cols} matrix, found {} rows (first row has {found_cols} entries)",
                    self.0.len()
                ),
            ));
        }
        if self.0.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(SpecError::field(path, "matrix entries must be finite"));
        }
        Ok(ComplexMatrix::from_fn(rows, cols, |i, j| c64(self.0[i][j][0], self.0[i][j][1])))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    #[serde(rename = "column-stacking")]
    ColumnStacking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub operator: JsonMatrix,
    pub rate: f64,
}

/// How the dynamics are given. GKSL generators use the Heisenberg-picture form
/// L(x) = i[H, x] + Σ γ (V†xV − ½{V†V, x}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Gksl { hamiltonian: JsonMatrix, jumps: Vec<JumpSpec> },
    Superoperator { convention: Convention, matrix: JsonMatrix },
    SemigroupMember { convention: Convention, matrix: JsonMatrix, time: f64 },
}

/// Available checks, declared in dependency order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Faithful,
    Invariance,
    Subinvariance,
    Schwarz,
    Cp,
    Unital,
    Induce,
    Gns,
    Theorem4,
    Decompose,
    Ccp,
    Gksl,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        Self::Faithful,
        Self::Invariance,
        Self::Subinvariance,
        Self::Schwarz,
        Self::Cp,
        Self::Unital,
        Self::Induce,
        Self::Gns,
        Self::Theorem4,
        Self::Decompose,
        Self::Ccp,
        Self::Gksl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Faithful => "faithful",
            Self::Invariance => "invariance",
            Self::Subinvariance => "subinvariance",
            Self::Schwarz => "schwarz",
            Self::Cp => "cp",
            Self::Unital => "unital",
            Self::Induce => "induce",
            Self::Gns => "gns",
            Self::Theorem4 => "theorem4",
            Self::Decompose => "decompose",
            Self::Ccp => "ccp",
            Self::Gksl => "gksl",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-spec overrides of the verdict thresholds; absent keys keep the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermiticity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_clip: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinv_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faithful: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unital: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_preserving: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_space: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        let mut t = base;
        let pairs: [(&mut f64, Option<f64>); 12] = [
            (&mut t.hermiticity, self.hermiticity),
            (&mut t.psd_clip, self.psd_clip),
            (&mut t.pinv_cutoff, self.pinv_cutoff),
            (&mut t.faithful, self.faithful),
            (&mut t.trace, self.trace),
            (&mut t.cp, self.cp),
            (&mut t.positivity, self.positivity),
            (&mut t.unital, self.unital),
            (&mut t.invariance, self.invariance),
            (&mut t.star_preserving, self.star_preserving),
            (&mut t.ccp, self.ccp),
            (&mut t.null_space, self.null_space),
        ];
        for (slot, value) in pairs {
            if let Some(v) = value {
                *slot = v;
            }
        }
        t
    }

    fn values(&self) -> impl Iterator<Item = f64> {
        [
            self.hermiticity,
            self.psd_clip,
            self.pinv_cutoff,
            self.faithful,
            self.trace,
            self.cp,
            self.positivity,
            self.unital,
            self.invariance,
            self.star_preserving,
            self.ccp,
            self.null_space,
        ]
        .into_iter()
        .flatten()
    }
}

/// The on-disk problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dim: usize,
    pub generator: GeneratorSpec,
    /// Invariant state; derived from the dynamics when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckName>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Semigroup times at which map-level checks run (generators only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

pub const DEFAULT_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

impl ProblemSpec {
    /// True when the invariant state must be derived from the dynamics.
    pub fn derives_state(&self) -> bool {
        self.state.is_none()
    }

    /// Requested checks in dependency order, each once.
    pub fn requested_checks(&self) -> Vec<CheckName> {
        let mut c = self.checks.clone().unwrap_or_else(|| CheckName::ALL.to_vec());
        c.sort();
        c.dedup();
        c
    }
}

#[derive(Clone, Debug)]
pub enum Dynamics {
    Generator(Generator),
    /// A single semigroup member T_t; generator-level checks are unavailable.
    Member {
        map: Superoperator,
        time: f64,
    },
}

/// A validated spec in numerical form.
#[derive(Clone, Debug)]
pub struct Problem {
    pub dim: usize,
    pub dynamics: Dynamics,
    pub state: Option<DensityMatrix>,
    pub checks: Vec<CheckName>,
    /// Defaults with the spec's overrides applied (before any global scaling).
    pub tolerances: Tolerances,
    pub seed: u64,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct SpecError {
    /// Dotted path of the offending field, empty for document-level errors.
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl SpecError {
    pub fn field(path: &str, message: impl Into<String>) -> Self {
        Self { path: path.to_string(), line: None, column: None, message: message.into() }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid spec")?;
        if !self.path.is_empty() && self.path != "." {
            write!(f, " at `{}`", self.path)?;
        }
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Deserializes JSON, reporting the field path and position of the first error.
pub fn from_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, SpecError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SpecError { path, line: Some(inner.line()), column: Some(inner.column()), message: inner.to_string() }
    })?;
    de.end().map_err(|e| SpecError {
        path: String::new(),
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Parses and validates a problem spec.
pub fn parse_spec(bytes: &[u8]) -> Result<ProblemSpec, SpecError> {
    let spec: ProblemSpec = from_json(bytes)?;
    spec.validate()?;
    Ok(spec)
}

/// Canonical serialization; `emit_spec(&parse_spec(b)?) == b` for emitted specs.
pub fn emit_spec(spec: &ProblemSpec) -> Vec<u8> {
    crate::json::to_bytes(spec)
}

impl ProblemSpec {
    /// Checks shapes and values and builds the numerical problem.
    pub fn validate(&self) -> Result<Problem, SpecError> {
        let n = self.dim;
        if n == 0 {
            return Err(SpecError::field("dim", "dimension must be at least 1"));
        }
        let tolerances = match &self.tolerances {
            Some(o) => {
                if o.values().any(|v| !(v.is_finite() && v >= 0.0)) {
                    return Err(SpecError::field("tolerances", "tolerances must be finite and non-negative"));
                }
                o.apply(Tolerances::default())
            }
            None => Tolerances::default(),
        };
        let dynamics = match &self.generator {
            GeneratorSpec::Gksl { hamiltonian, jumps } => {
                let h = hamiltonian.to_matrix("generator.hamiltonian", n, n)?;
                if h.hermiticity_deviation() > tolerances.hermiticity * h.max_abs().max(1.0) {
                    return Err(SpecError::field("generator.hamiltonian", "Hamiltonian must be Hermitian"));
                }
                let mut js = Vec::with_capacity(jumps.len());
                for (k, j) in jumps.iter().enumerate() {
                    let v = j.operator.to_matrix(&format!("generator.jumps[{k}].operator"), n, n)?;
                    if !j.rate.is_finite() {
                        return Err(SpecError::field(&format!("generator.jumps[{k}].rate"), "rate must be finite"));
                    }
                    js.push((v, j.rate));
                }
                let g = Generator::gksl(&h.hermitian_part(), &js)
                    .map_err(|e| SpecError::field("generator", e.to_string()))?;
                Dynamics::Generator(g)
            }
            GeneratorSpec::Superoperator { matrix, .. } => {
                let m = matrix.to_matrix("generator.matrix", n * n, n * n)?;
                let s =
                    Superoperator::from_matrix(m).map_err(|e| SpecError::field("generator.matrix", e.to_string()))?;
                Dynamics::Generator(Generator::new(s, qms_core::Provenance::RawSuperoperator))
            }
            GeneratorSpec::SemigroupMember { matrix, time, .. } => {
                if !(time.is_finite() && *time >= 0.0) {
                    return Err(SpecError::field("generator.time", "time must be finite and non-negative"));
                }
                let m = matrix.to_matrix("generator.matrix", n * n, n * n)?;
                let s =
                    Superoperator::from_matrix(m).map_err(|e| SpecError::field("generator.matrix", e.to_string()))?;
                Dynamics::Member { map: s, time: *time }
            }
        };
        let state = match &self.state {
            Some(m) => {
                let r = m.to_matrix("state", n, n)?;
                Some(DensityMatrix::new(r, &tolerances).map_err(|e| SpecError::field("state", e.to_string()))?)
            }
            None => None,
        };
        let times = self.times.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec());
        if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(SpecError::field("times", "times must be a non-empty list of finite, non-negative numbers"));
        }
        Ok(Problem {
            dim: n,
            dynamics,
            state,
            checks: self.requested_checks(),
            tolerances,
            seed: self.seed.unwrap_or(0),
            times,
        })
    }
}
