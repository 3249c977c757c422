//! JSON problem files.
//!
//! ```json
//! {
//!   "name": "tiny",
//!   "n": 2,
//!   "objective": { "kind": "quadratic+cos", "quadratic": 1.0, "amplitude": 1.0, "omega": 4.0 },
//!   "A": [1.0, 1.0],
//!   "b": [1.0],
//!   "m_e": 1,
//!   "x0": [0.5, 0.5],
//!   "f_low": -2.0,
//!   "L1": 17.0
//! }
//! ```
//!
//! `A` is row-major with `len(b)` rows. Only the parametric objective kinds of
//! [`ObjectiveKind`] are accepted.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ConstraintSet, ObjectiveKind, ObjectiveOracle, ProblemError, ProblemSpec};

/// Largest `n` and `m` accepted from a file.
pub const MAX_FILE_DIMENSION: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub n: usize,
    pub objective: ObjectiveKind,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub m_e: usize,
    pub x0: Vec<f64>,
    pub f_low: f64,
    #[serde(rename = "L1", default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(rename = "L2", default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
}

impl ProblemFile {
    /// Exports a linear problem with a parametric objective.
    pub fn from_spec(problem: &ProblemSpec) -> Option<Self> {
        let kind = problem.objective.kind()?.clone();
        let (a, b) = problem.constraints.matrix()?;
        Some(Self {
            name: problem.name.clone(),
            n: problem.n(),
            objective: kind,
            a: a.transpose().iter().copied().collect(),
            b: b.iter().copied().collect(),
            m_e: problem.m_e(),
            x0: problem.x0.iter().copied().collect(),
            f_low: problem.objective.f_low,
            l1: problem.objective.global_l1(),
            l2: problem.objective.global_l2(),
        })
    }

    pub fn into_spec(self) -> Result<ProblemSpec, ProblemError> {
        let n = self.n;
        let m = self.b.len();
        if n == 0 || n > MAX_FILE_DIMENSION {
            return Err(ProblemError::InvalidParameter(format!(
                "n must lie in 1..={MAX_FILE_DIMENSION}, got {n}"
            )));
        }
        if m > MAX_FILE_DIMENSION {
            return Err(ProblemError::InvalidParameter(format!(
                "at most {MAX_FILE_DIMENSION} constraints are supported, got {m}"
            )));
        }
        if self.x0.len() != n {
            return Err(ProblemError::Dimension {
                what: "x0",
                expected: n,
                found: self.x0.len(),
            });
        }
        let entries = m * n;
        if self.a.len() != entries {
            return Err(ProblemError::Dimension {
                what: "A (row-major, len(b) rows)",
                expected: entries,
                found: self.a.len(),
            });
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(ProblemError::NonFinite("x0"));
        }
        for (label, l) in [("L1", self.l1), ("L2", self.l2)] {
            if let Some(l) = l {
                if !(l.is_finite() && l >= 0.0) {
                    return Err(ProblemError::InvalidParameter(format!(
                        "{label} must be finite and nonnegative, got {l}"
                    )));
                }
            }
        }
        let a = DMatrix::from_row_slice(m, n, &self.a);
        let constraints = ConstraintSet::linear(a, DVector::from_vec(self.b), self.m_e)?;
        let objective =
            ObjectiveOracle::parametric(self.objective, self.f_low)?.with_lipschitz(self.l1, self.l2);
        ProblemSpec::new(self.name, objective, constraints, DVector::from_vec(self.x0))
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, ProblemError> {
    let file: ProblemFile = serde_json::from_str(text)?;
    file.into_spec()
}

pub fn parse_problem_bytes(bytes: &[u8]) -> Result<ProblemSpec, ProblemError> {
    let file: ProblemFile = serde_json::from_slice(bytes)?;
    file.into_spec()
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text)
}

/// Resolves either a corpus name or a path to a problem file.
pub fn resolve(problem_ref: &str) -> Result<ProblemSpec, ProblemError> {
    match super::corpus::by_name(problem_ref) {
        Ok(p) => Ok(p),
        Err(ProblemError::UnknownProblem(_)) => {
            let path = Path::new(problem_ref);
            if path.exists() {
                load_problem(path)
            } else {
                Err(ProblemError::UnknownProblem(problem_ref.to_string()))
            }
        }
        Err(e) => Err(e),
    }
}
