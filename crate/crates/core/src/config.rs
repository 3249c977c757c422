//! Solver configuration and its JSON representation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::inner::InnerMethod;
use crate::lagrangian::PenaltyPolicy;
use crate::problem::ProblemSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("inner solver {method} does not apply to problem `{problem}`: {reason}")]
    Inapplicable {
        method: InnerMethod,
        problem: String,
        reason: &'static str,
    },
    #[error("malformed configuration file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonitorMode {
    /// Abort the solve on the first failed invariant.
    Strict,
    /// Log failed invariants and continue.
    Record,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma0: f64,
    pub eps: f64,
    pub penalty_policy: PenaltyPolicy,
    /// `None` picks a method from the problem structure.
    pub inner: Option<InnerMethod>,
    pub max_outer: usize,
    pub monitor: MonitorMode,
    /// Inner stationarity tolerance; defaults to `eps`.
    pub inner_eps: Option<f64>,
    /// Initial multipliers; defaults to zero.
    pub lambda0: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 3.0,
            gamma: 0.5,
            sigma0: 1.0,
            eps: 1e-3,
            penalty_policy: PenaltyPolicy::PolynomialGrowth,
            inner: None,
            max_outer: 10_000,
            monitor: MonitorMode::Strict,
            inner_eps: None,
            lambda0: None,
        }
    }
}

fn open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return bad(format!("alpha must be finite and > 1, got {}", self.alpha));
        }
        if !open_unit(self.gamma) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !open_unit(self.eps) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return bad(format!("sigma0 must be finite and > 0, got {}", self.sigma0));
        }
        if let Some(e) = self.inner_eps {
            if !(e.is_finite() && e > 0.0) {
                return bad(format!("inner_eps must be finite and > 0, got {e}"));
            }
        }
        if let Some(l) = &self.lambda0 {
            if !l.iter().all(|v| v.is_finite()) {
                return bad("lambda0 must be finite".into());
            }
        }
        Ok(())
    }

    pub fn inner_eps(&self) -> f64 {
        self.inner_eps.unwrap_or(self.eps)
    }

    /// The configured inner method, or the default for `problem`: fixed-step
    /// gradient descent when the Lipschitz bound for linear constraints
    /// applies, backtracking otherwise.
    pub fn resolve_inner(&self, problem: &ProblemSpec) -> Result<InnerMethod, ConfigError> {
        let fixed_step_ok = fixed_step_applies(problem);
        match self.inner {
            None if fixed_step_ok.is_ok() => Ok(InnerMethod::FixedStepGd),
            None => Ok(InnerMethod::BacktrackingGd),
            Some(method @ InnerMethod::FixedStepGd) => fixed_step_ok
                .map(|()| method)
                .map_err(|reason| inapplicable(method, problem, reason)),
            Some(method @ InnerMethod::CubicNewton) => cubic_applies(problem)
                .map(|()| method)
                .map_err(|reason| inapplicable(method, problem, reason)),
            Some(method @ InnerMethod::BacktrackingGd) => Ok(method),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_slice(bytes)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn inapplicable(method: InnerMethod, problem: &ProblemSpec, reason: &'static str) -> ConfigError {
    ConfigError::Inapplicable {
        method,
        problem: problem.name.clone(),
        reason,
    }
}

fn fixed_step_applies(problem: &ProblemSpec) -> Result<(), &'static str> {
    if problem.constraints.matrix().is_none() {
        return Err("constraints are not linear");
    }
    if !problem.constraints.nonneg_ineq_rows() {
        return Err("an inequality row has a negative coefficient");
    }
    if problem.objective.global_l1().is_none() {
        return Err("no global gradient Lipschitz constant is declared");
    }
    Ok(())
}

fn cubic_applies(problem: &ProblemSpec) -> Result<(), &'static str> {
    if problem.constraints.matrix().is_none() {
        return Err("constraints are not linear");
    }
    if !problem.constraints.is_equality_only() {
        return Err("the problem has inequality constraints");
    }
    if problem.objective.hessian(&problem.x0).is_none() {
        return Err("the objective has no Hessian oracle");
    }
    Ok(())
}
