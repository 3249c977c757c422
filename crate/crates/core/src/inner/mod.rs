//! Monotone unconstrained solvers for the augmented Lagrangian subproblems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::lagrangian::{AugmentedLagrangian, LagrangianError};
use crate::problem::ProblemSpec;

mod cubic;
mod gd;

pub use cubic::{cubic_model, cubic_newton_solve, cubic_step, M_MIN, MAX_CUBIC_ITERATIONS};
pub use gd::{gd_solve, GdVariant, ARMIJO_C1, MAX_BACKTRACKING_ITERATIONS, MIN_STEP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InnerError {
    #[error("iteration cap of {cap} exceeded with ‖∇g‖₂ = {grad_norm:e}")]
    IterationCapExceeded { cap: u64, grad_norm: f64 },
    #[error("non-finite {0} returned by the oracle")]
    NonFiniteValue(&'static str),
    #[error("line search step fell below {MIN_STEP:e} with ‖∇g‖₂ = {grad_norm:e}")]
    LineSearchFailure { grad_norm: f64 },
    #[error("eigendecomposition failed: {0}")]
    EigendecompositionFailure(String),
    #[error("fixed-step gradient descent needs a positive Lipschitz constant")]
    MissingLipschitz,
    #[error("the cubic Newton solver needs a Hessian oracle")]
    MissingHessian,
    #[error("invalid inner task: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    Oracle(#[from] LagrangianError),
}

/// A smooth function `g: R^n -> R` minimized by the inner solvers.
pub trait SmoothFunction {
    fn value(&self, x: &DVector<f64>) -> Result<f64, InnerError>;

    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>), InnerError>;

    fn hessian(&self, _x: &DVector<f64>) -> Result<Option<DMatrix<f64>>, InnerError> {
        Ok(None)
    }
}

impl SmoothFunction for AugmentedLagrangian<'_> {
    fn value(&self, x: &DVector<f64>) -> Result<f64, InnerError> {
        Ok(AugmentedLagrangian::value(self, x)?)
    }

    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>), InnerError> {
        Ok(AugmentedLagrangian::value_and_gradient(self, x)?)
    }

    fn hessian(&self, x: &DVector<f64>) -> Result<Option<DMatrix<f64>>, InnerError> {
        Ok(AugmentedLagrangian::hessian(self, x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerMethod {
    #[serde(rename = "gd-fixed")]
    FixedStepGd,
    #[serde(rename = "gd-backtracking")]
    BacktrackingGd,
    #[serde(rename = "cubic")]
    CubicNewton,
}

impl InnerMethod {
    pub const ALL: [InnerMethod; 3] = [
        InnerMethod::FixedStepGd,
        InnerMethod::BacktrackingGd,
        InnerMethod::CubicNewton,
    ];

    /// Derivative order `p` of the method.
    pub fn order(self) -> u32 {
        match self {
            InnerMethod::FixedStepGd | InnerMethod::BacktrackingGd => 1,
            InnerMethod::CubicNewton => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InnerMethod::FixedStepGd => "gd-fixed",
            InnerMethod::BacktrackingGd => "gd-backtracking",
            InnerMethod::CubicNewton => "cubic",
        }
    }
}

impl std::fmt::Display for InnerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InnerMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InnerMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown inner solver `{s}` (expected gd-fixed, gd-backtracking or cubic)"))
    }
}

#[derive(Clone, Debug)]
pub struct InnerTask<'a, F: SmoothFunction + ?Sized> {
    pub function: &'a F,
    pub start: DVector<f64>,
    pub eps: f64,
    /// Lipschitz constant of the gradient (first-order methods) or of the
    /// Hessian (cubic Newton).
    pub known_l: Option<f64>,
    /// Lower bound of `g`, used to size the fixed-step iteration cap.
    pub g_low: Option<f64>,
    /// Overrides the default iteration cap.
    pub max_iterations: Option<u64>,
}

impl<'a, F: SmoothFunction + ?Sized> InnerTask<'a, F> {
    pub fn new(function: &'a F, start: DVector<f64>, eps: f64) -> Self {
        Self {
            function,
            start,
            eps,
            known_l: None,
            g_low: None,
            max_iterations: None,
        }
    }

    pub fn with_lipschitz(mut self, l: Option<f64>) -> Self {
        self.known_l = l;
        self
    }

    pub fn with_lower_bound(mut self, g_low: Option<f64>) -> Self {
        self.g_low = g_low;
        self
    }

    pub fn with_max_iterations(mut self, cap: Option<u64>) -> Self {
        self.max_iterations = cap;
        self
    }

    fn check(&self) -> Result<(), InnerError> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(InnerError::InvalidTask(format!("eps must be positive, got {}", self.eps)));
        }
        if !self.start.iter().all(|v| v.is_finite()) {
            return Err(InnerError::InvalidTask("start point is not finite".into()));
        }
        if let Some(l) = self.known_l {
            if !(l.is_finite() && l >= 0.0) {
                return Err(InnerError::InvalidTask(format!("known L must be finite and nonnegative, got {l}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerResult {
    pub x_final: DVector<f64>,
    pub value_start: f64,
    pub value_final: f64,
    pub grad_norm2: f64,
    /// Accepted steps.
    pub iterations: u64,
    /// Rejected trial steps (backtracking halvings or cubic regularization increases).
    pub rejected_steps: u64,
    /// Joint value/gradient(/Hessian) evaluations.
    pub oracle_calls: u64,
    /// `g(start) − g(x_final)`.
    pub decrease: f64,
    /// `grad_norm2 ≤ eps`.
    pub accepted: bool,
    /// True iff no accepted step increased `g`.
    pub monotone: bool,
}

pub(crate) fn finite_pair(value: f64, grad: &DVector<f64>) -> Result<(), InnerError> {
    if !value.is_finite() {
        return Err(InnerError::NonFiniteValue("function value"));
    }
    if !grad.iter().all(|v| v.is_finite()) {
        return Err(InnerError::NonFiniteValue("gradient"));
    }
    Ok(())
}

/// Runs `method` on `task`.
pub fn run<F: SmoothFunction + ?Sized>(
    method: InnerMethod,
    task: &InnerTask<'_, F>,
) -> Result<InnerResult, InnerError> {
    match method {
        InnerMethod::FixedStepGd => gd_solve(task, GdVariant::FixedStep),
        InnerMethod::BacktrackingGd => gd_solve(task, GdVariant::Backtracking),
        InnerMethod::CubicNewton => cubic_newton_solve(task),
    }
}

/// The better of `x0` and `x_prev` under `P(·, λ, σ)`; ties go to `x_prev`.
pub fn warm_start(
    problem: &ProblemSpec,
    lambda: &DVector<f64>,
    sigma: f64,
    x0: &DVector<f64>,
    x_prev: &DVector<f64>,
) -> Result<DVector<f64>, LagrangianError> {
    let p = AugmentedLagrangian::new(problem, lambda, sigma)?;
    if p.value(x0)? < p.value(x_prev)? {
        Ok(x0.clone())
    } else {
        Ok(x_prev.clone())
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::corpus;

    #[test]
    fn warm_start_picks_smaller_value_and_prefers_previous_on_ties() {
        // eq-qp: P(x, 0, 1) = ½‖x‖² + ½(1ᵀx − 1)².
        let p = corpus::eq_qp(2).unwrap();
        let lambda = DVector::zeros(1);
        let x0 = DVector::from_column_slice(&[1.0, 0.0]);
        let better = DVector::from_column_slice(&[0.5, 0.5]);
        assert_eq!(warm_start(&p, &lambda, 1.0, &x0, &better).unwrap(), better);
        let worse = DVector::from_column_slice(&[3.0, 3.0]);
        assert_eq!(warm_start(&p, &lambda, 1.0, &x0, &worse).unwrap(), x0);
        let mirror = DVector::from_column_slice(&[0.0, 1.0]);
        assert_eq!(warm_start(&p, &lambda, 1.0, &x0, &mirror).unwrap(), mirror);
    }

    #[test]
    fn method_names_round_trip() {
        for m in InnerMethod::ALL {
            assert_eq!(m.name().parse::<InnerMethod>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("newton".parse::<InnerMethod>().is_err());
        assert_eq!(InnerMethod::CubicNewton.order(), 2);
    }
}
