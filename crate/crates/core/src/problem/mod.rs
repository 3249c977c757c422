//! Problem definitions: objective oracles, constraint sets and problem specs.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub mod corpus;
pub mod file;
mod validate;

pub use validate::{validate, CheckOutcome, ValidationReport, GRADIENT_REL_TOL};

/// Tolerance used for the feasibility of starting points.
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A twice differentiable objective `f: R^n -> R`.
pub trait Objective: Send + Sync + fmt::Debug {
    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

/// The parametric objective families that can be loaded from problem files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ObjectiveKind {
    /// `f(x) = ½·q·‖x‖² + a·Σ_j cos(ω x_j)`.
    #[serde(rename = "quadratic+cos")]
    QuadraticCos {
        #[serde(default = "one")]
        quadratic: f64,
        #[serde(default = "one")]
        amplitude: f64,
        omega: f64,
    },
    /// Chained Rosenbrock `Σ_{j<n} b(x_{j+1} − x_j²)² + (a − x_j)²`.
    #[serde(rename = "rosenbrock")]
    Rosenbrock {
        #[serde(default = "one")]
        a: f64,
        #[serde(default = "hundred")]
        b: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn hundred() -> f64 {
    100.0
}

impl ObjectiveKind {
    fn check(&self) -> Result<(), ProblemError> {
        let params: &[f64] = match self {
            ObjectiveKind::QuadraticCos {
                quadratic,
                amplitude,
                omega,
            } => &[*quadratic, *amplitude, *omega],
            ObjectiveKind::Rosenbrock { a, b } => &[*a, *b],
        };
        if params.iter().all(|p| p.is_finite()) {
            Ok(())
        } else {
            Err(ProblemError::NonFinite("objective parameters"))
        }
    }
}

impl Objective for ObjectiveKind {
    fn value(&self, x: &DVector<f64>) -> f64 {
        match *self {
            ObjectiveKind::QuadraticCos {
                quadratic,
                amplitude,
                omega,
            } => {
                0.5 * quadratic * x.norm_squared()
                    + amplitude * x.iter().map(|&xj| (omega * xj).cos()).sum::<f64>()
            }
            ObjectiveKind::Rosenbrock { a, b } => x
                .as_slice()
                .windows(2)
                .map(|w| b * (w[1] - w[0] * w[0]).powi(2) + (a - w[0]).powi(2))
                .sum(),
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match *self {
            ObjectiveKind::QuadraticCos {
                quadratic,
                amplitude,
                omega,
            } => x.map(|xj| quadratic * xj - amplitude * omega * (omega * xj).sin()),
            ObjectiveKind::Rosenbrock { a, b } => {
                let n = x.len();
                let mut g = DVector::zeros(n);
                for j in 0..n.saturating_sub(1) {
                    let r = x[j + 1] - x[j] * x[j];
                    g[j] += -4.0 * b * x[j] * r - 2.0 * (a - x[j]);
                    g[j + 1] += 2.0 * b * r;
                }
                g
            }
        }
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = x.len();
        let h = match *self {
            ObjectiveKind::QuadraticCos {
                quadratic,
                amplitude,
                omega,
            } => DMatrix::from_diagonal(
                &x.map(|xj| quadratic - amplitude * omega * omega * (omega * xj).cos()),
            ),
            ObjectiveKind::Rosenbrock { b, .. } => {
                let mut h = DMatrix::zeros(n, n);
                for j in 0..n.saturating_sub(1) {
                    h[(j, j)] += 12.0 * b * x[j] * x[j] - 4.0 * b * x[j + 1] + 2.0;
                    h[(j + 1, j + 1)] += 2.0 * b;
                    h[(j, j + 1)] -= 4.0 * b * x[j];
                    h[(j + 1, j)] -= 4.0 * b * x[j];
                }
                h
            }
        };
        Some(h)
    }
}

/// Whether the declared Lipschitz constants hold on all of `R^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzScope {
    Global,
    /// Derivatives are only locally Lipschitz; fixed-step methods and bound
    /// certification do not apply.
    LocalOnly,
}

/// Objective function together with the metadata the complexity analysis uses.
#[derive(Clone)]
pub struct ObjectiveOracle {
    function: Arc<dyn Objective>,
    kind: Option<ObjectiveKind>,
    /// Finite global lower bound of `f` over `R^n`.
    pub f_low: f64,
    /// Lipschitz constant of the gradient.
    pub l1: Option<f64>,
    /// Lipschitz constant of the Hessian.
    pub l2: Option<f64>,
    pub scope: LipschitzScope,
}

impl fmt::Debug for ObjectiveOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveOracle")
            .field("function", &self.function)
            .field("f_low", &self.f_low)
            .field("l1", &self.l1)
            .field("l2", &self.l2)
            .field("scope", &self.scope)
            .finish()
    }
}

impl ObjectiveOracle {
    pub fn new(function: Arc<dyn Objective>, f_low: f64) -> Self {
        Self {
            function,
            kind: None,
            f_low,
            l1: None,
            l2: None,
            scope: LipschitzScope::LocalOnly,
        }
    }

    pub fn parametric(kind: ObjectiveKind, f_low: f64) -> Result<Self, ProblemError> {
        kind.check()?;
        Ok(Self {
            function: Arc::new(kind.clone()),
            kind: Some(kind),
            f_low,
            l1: None,
            l2: None,
            scope: LipschitzScope::LocalOnly,
        })
    }

    /// Declares globally valid Lipschitz constants.
    pub fn with_lipschitz(mut self, l1: Option<f64>, l2: Option<f64>) -> Self {
        self.l1 = l1;
        self.l2 = l2;
        self.scope = if l1.is_some() || l2.is_some() {
            LipschitzScope::Global
        } else {
            LipschitzScope::LocalOnly
        };
        self
    }

    pub fn kind(&self) -> Option<&ObjectiveKind> {
        self.kind.as_ref()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.function.value(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.function.gradient(x)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.function.hessian(x)
    }

    /// Global gradient Lipschitz constant, if one is declared.
    pub fn global_l1(&self) -> Option<f64> {
        match self.scope {
            LipschitzScope::Global => self.l1,
            LipschitzScope::LocalOnly => None,
        }
    }

    pub fn global_l2(&self) -> Option<f64> {
        match self.scope {
            LipschitzScope::Global => self.l2,
            LipschitzScope::LocalOnly => None,
        }
    }
}

/// Differentiable constraint functions `c: R^n -> R^m`.
pub trait ConstraintFunction: Send + Sync + fmt::Debug {
    fn values(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Jacobian with one row per constraint.
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Clone, Debug)]
pub enum ConstraintKind {
    /// `c(x) = A x − b`.
    Linear {
        a: DMatrix<f64>,
        b: DVector<f64>,
        frobenius_sq: f64,
    },
    General(Arc<dyn ConstraintFunction>),
}

/// Constraints `c_i(x) = 0` for `i < m_e` and `c_i(x) ≥ 0` for `i ≥ m_e`.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    kind: ConstraintKind,
    n: usize,
    m: usize,
    m_e: usize,
}

impl ConstraintSet {
    pub fn linear(a: DMatrix<f64>, b: DVector<f64>, m_e: usize) -> Result<Self, ProblemError> {
        if a.nrows() != b.len() {
            return Err(ProblemError::Dimension {
                what: "constraint right-hand side",
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if m_e > a.nrows() {
            return Err(ProblemError::InvalidParameter(format!(
                "m_e = {m_e} exceeds the number of constraints {}",
                a.nrows()
            )));
        }
        if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
            return Err(ProblemError::NonFinite("constraint data"));
        }
        let frobenius_sq = a.norm_squared();
        Ok(Self {
            n: a.ncols(),
            m: a.nrows(),
            m_e,
            kind: ConstraintKind::Linear { a, b, frobenius_sq },
        })
    }

    pub fn general(
        function: Arc<dyn ConstraintFunction>,
        n: usize,
        m: usize,
        m_e: usize,
    ) -> Result<Self, ProblemError> {
        if m_e > m {
            return Err(ProblemError::InvalidParameter(format!(
                "m_e = {m_e} exceeds the number of constraints {m}"
            )));
        }
        Ok(Self {
            kind: ConstraintKind::General(function),
            n,
            m,
            m_e,
        })
    }

    /// No constraints at all.
    pub fn unconstrained(n: usize) -> Self {
        Self {
            kind: ConstraintKind::Linear {
                a: DMatrix::zeros(0, n),
                b: DVector::zeros(0),
                frobenius_sq: 0.0,
            },
            n,
            m: 0,
            m_e: 0,
        }
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn m_e(&self) -> usize {
        self.m_e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_equality_only(&self) -> bool {
        self.m == self.m_e
    }

    pub fn matrix(&self) -> Option<(&DMatrix<f64>, &DVector<f64>)> {
        match &self.kind {
            ConstraintKind::Linear { a, b, .. } => Some((a, b)),
            ConstraintKind::General(_) => None,
        }
    }

    /// Cached `‖A‖_F²` for linear constraints.
    pub fn frobenius_sq(&self) -> Option<f64> {
        match &self.kind {
            ConstraintKind::Linear { frobenius_sq, .. } => Some(*frobenius_sq),
            ConstraintKind::General(_) => None,
        }
    }

    /// True iff every inequality row of a linear constraint set has only
    /// nonnegative coefficients. Always false for general constraints.
    pub fn nonneg_ineq_rows(&self) -> bool {
        match &self.kind {
            ConstraintKind::Linear { a, .. } => {
                (self.m_e..self.m).all(|i| a.row(i).iter().all(|&v| v >= 0.0))
            }
            ConstraintKind::General(_) => false,
        }
    }

    pub fn values(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ConstraintKind::Linear { a, b, .. } => a * x - b,
            ConstraintKind::General(c) => c.values(x),
        }
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.kind {
            ConstraintKind::Linear { a, .. } => a.clone(),
            ConstraintKind::General(c) => c.jacobian(x),
        }
    }

    /// `J(x)ᵀ w`.
    pub fn jacobian_tr_mul(&self, x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            ConstraintKind::Linear { a, .. } => a.tr_mul(w),
            ConstraintKind::General(c) => c.jacobian(x).tr_mul(w),
        }
    }

    /// `(‖c_E(x)‖_∞, ‖c_I^(−)(x)‖_∞)`.
    pub fn violation(&self, c: &DVector<f64>) -> (f64, f64) {
        let eq = c.rows(0, self.m_e).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let ineq = c
            .rows(self.m_e, self.m - self.m_e)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(-v.min(0.0)));
        (eq, ineq)
    }
}

/// A constrained minimization problem with a feasible starting point.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub objective: ObjectiveOracle,
    pub constraints: ConstraintSet,
    pub x0: DVector<f64>,
}

impl ProblemSpec {
    /// Checks dimensions only; feasibility of `x0` is reported by [`validate`].
    pub fn new(
        name: impl Into<String>,
        objective: ObjectiveOracle,
        constraints: ConstraintSet,
        x0: DVector<f64>,
    ) -> Result<Self, ProblemError> {
        if constraints.n() != x0.len() {
            return Err(ProblemError::Dimension {
                what: "starting point",
                expected: constraints.n(),
                found: x0.len(),
            });
        }
        if x0.is_empty() {
            return Err(ProblemError::InvalidParameter("n must be at least 1".into()));
        }
        if !x0.iter().all(|v| v.is_finite()) {
            return Err(ProblemError::NonFinite("starting point"));
        }
        if !objective.f_low.is_finite() {
            return Err(ProblemError::NonFinite("f_low"));
        }
        for (label, l) in [("L1", objective.l1), ("L2", objective.l2)] {
            if let Some(l) = l {
                if !(l.is_finite() && l >= 0.0) {
                    return Err(ProblemError::InvalidParameter(format!(
                        "{label} must be finite and nonnegative, got {l}"
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            objective,
            constraints,
            x0,
        })
    }

    pub fn n(&self) -> usize {
        self.x0.len()
    }

    pub fn m(&self) -> usize {
        self.constraints.m()
    }

    pub fn m_e(&self) -> usize {
        self.constraints.m_e()
    }

    /// `(‖c_E(x)‖_∞, ‖c_I^(−)(x)‖_∞)`.
    pub fn violation(&self, x: &DVector<f64>) -> (f64, f64) {
        self.constraints.violation(&self.constraints.values(x))
    }

    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        let (eq, ineq) = self.violation(x);
        eq <= tol && ineq <= tol
    }
}
