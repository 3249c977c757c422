//! Lagrangian, augmented Lagrangian and the multiplier/penalty updates.
//!
//! With `c_i(x) = 0` for `i < m_e` and `c_i(x) ≥ 0` otherwise, the augmented
//! Lagrangian is evaluated in two ways:
//!
//! * branch form: each inequality contributes `−λ_i c_i + ½σc_i²` when
//!   `c_i < λ_i/σ` and `−½λ_i²/σ` otherwise;
//! * shifted form: `f + (σ/2) Σ [(c_i − λ_i/σ)_±² − (λ_i/σ)²]`, with the
//!   `(·)_− = min(·, 0)` clamp on inequality rows.
//!
//! [`eval_p`] computes both and reports a [`LagrangianError::FormDisagreement`]
//! if they drift apart.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::problem::{ConstraintKind, ConstraintSet, ProblemSpec};

/// Relative agreement required between the two augmented Lagrangian forms.
pub const FORM_AGREEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LagrangianError {
    #[error("augmented Lagrangian forms disagree: branch form {branch:e}, shifted form {shifted:e}")]
    FormDisagreement { branch: f64, shifted: f64 },
    #[error("unsupported specialization: {0}")]
    UnsupportedSpecialization(String),
    #[error("penalty parameter must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    #[error("multiplier vector has length {found}, expected {expected}")]
    MultiplierLength { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PenaltyPolicy {
    /// `σ ← max{(k+1)^α, σ}` when θ fails to contract.
    #[serde(rename = "polynomial")]
    PolynomialGrowth,
    /// `σ ← max{4^{k+1}, σ}` when θ fails to contract.
    #[serde(rename = "geometric")]
    GeometricGrowth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PenaltyState {
    pub sigma: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub policy: PenaltyPolicy,
}

/// θ = max of the three parts; absent parts are those with no rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaStat {
    pub value: f64,
    pub mult_over_sigma: f64,
    pub eq_shifted_residual: Option<f64>,
    pub ineq_violation: Option<f64>,
}

fn inf_norm<'a>(values: impl IntoIterator<Item = &'a f64>) -> f64 {
    values.into_iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// True iff `λ_i ≥ 0` for every inequality row.
pub fn sign_ok(lambda: &DVector<f64>, m_e: usize) -> bool {
    lambda.iter().skip(m_e).all(|&l| l >= 0.0)
}

pub fn lagrangian_value(problem: &ProblemSpec, x: &DVector<f64>, lambda: &DVector<f64>) -> f64 {
    problem.objective.value(x) - lambda.dot(&problem.constraints.values(x))
}

/// `∇f(x) − Σ_i λ_i ∇c_i(x)`.
pub fn lagrangian_grad(
    problem: &ProblemSpec,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
) -> DVector<f64> {
    problem.objective.gradient(x) - problem.constraints.jacobian_tr_mul(x, lambda)
}

/// Branch form of the augmented Lagrangian from precomputed `f` and `c`.
pub fn branch_form(f: f64, c: &DVector<f64>, lambda: &DVector<f64>, sigma: f64, m_e: usize) -> f64 {
    c.iter()
        .zip(lambda.iter())
        .enumerate()
        .fold(f, |acc, (i, (&ci, &li))| {
            if i < m_e || ci < li / sigma {
                acc - li * ci + 0.5 * sigma * ci * ci
            } else {
                acc - 0.5 * li * li / sigma
            }
        })
}

/// Shifted-square form of the augmented Lagrangian.
pub fn shifted_form(f: f64, c: &DVector<f64>, lambda: &DVector<f64>, sigma: f64, m_e: usize) -> f64 {
    let sum: f64 = c
        .iter()
        .zip(lambda.iter())
        .enumerate()
        .map(|(i, (&ci, &li))| {
            let shift = li / sigma;
            let t = ci - shift;
            let t = if i < m_e { t } else { t.min(0.0) };
            t * t - shift * shift
        })
        .sum();
    f + 0.5 * sigma * sum
}

// Magnitude of the summands, used to scale the agreement test.
fn form_scale(f: f64, c: &DVector<f64>, lambda: &DVector<f64>, sigma: f64) -> f64 {
    let terms: f64 = c
        .iter()
        .zip(lambda.iter())
        .map(|(&ci, &li)| (li * ci).abs() + 0.5 * sigma * ci * ci + 0.5 * li * li / sigma)
        .sum();
    1.0f64.max(f.abs()).max(terms)
}

/// `P(·, λ, σ)` for a fixed multiplier/penalty pair.
#[derive(Clone, Copy, Debug)]
pub struct AugmentedLagrangian<'a> {
    problem: &'a ProblemSpec,
    lambda: &'a DVector<f64>,
    sigma: f64,
}

impl<'a> AugmentedLagrangian<'a> {
    pub fn new(
        problem: &'a ProblemSpec,
        lambda: &'a DVector<f64>,
        sigma: f64,
    ) -> Result<Self, LagrangianError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(LagrangianError::InvalidPenalty(sigma));
        }
        if lambda.len() != problem.m() {
            return Err(LagrangianError::MultiplierLength {
                expected: problem.m(),
                found: lambda.len(),
            });
        }
        Ok(Self {
            problem,
            lambda,
            sigma,
        })
    }

    pub fn problem(&self) -> &'a ProblemSpec {
        self.problem
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> &'a DVector<f64> {
        self.lambda
    }

    fn value_from(&self, f: f64, c: &DVector<f64>) -> Result<f64, LagrangianError> {
        let m_e = self.problem.m_e();
        let branch = branch_form(f, c, self.lambda, self.sigma, m_e);
        let shifted = shifted_form(f, c, self.lambda, self.sigma, m_e);
        let scale = form_scale(f, c, self.lambda, self.sigma);
        // NaN on either side fails the comparison; identical infinities pass.
        let agree = (branch - shifted).abs() <= FORM_AGREEMENT_TOL * scale
            || (branch.is_infinite() && branch.to_bits() == shifted.to_bits());
        if agree {
            Ok(branch)
        } else {
            Err(LagrangianError::FormDisagreement { branch, shifted })
        }
    }

    // Weights w with ∇P = ∇f + Jᵀw. At c_i = λ_i/σ the inequality takes the
    // inactive branch.
    fn weights(&self, c: &DVector<f64>) -> DVector<f64> {
        let m_e = self.problem.m_e();
        DVector::from_iterator(
            c.len(),
            c.iter().zip(self.lambda.iter()).enumerate().map(|(i, (&ci, &li))| {
                if i < m_e || ci < li / self.sigma {
                    self.sigma * ci - li
                } else {
                    0.0
                }
            }),
        )
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64, LagrangianError> {
        let f = self.problem.objective.value(x);
        let c = self.problem.constraints.values(x);
        self.value_from(f, &c)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.problem.constraints.values(x);
        self.problem.objective.gradient(x) + self.problem.constraints.jacobian_tr_mul(x, &self.weights(&c))
    }

    pub fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>), LagrangianError> {
        let f = self.problem.objective.value(x);
        let c = self.problem.constraints.values(x);
        let value = self.value_from(f, &c)?;
        let grad = self.problem.objective.gradient(x)
            + self.problem.constraints.jacobian_tr_mul(x, &self.weights(&c));
        Ok((value, grad))
    }

    /// `∇²f(x) + σAᵀA`, available for equality-only linear constraints when
    /// the objective supplies a Hessian.
    pub fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let constraints = &self.problem.constraints;
        if !constraints.is_equality_only() {
            return None;
        }
        let ConstraintKind::Linear { a, .. } = constraints.kind() else {
            return None;
        };
        let h = self.problem.objective.hessian(x)?;
        Some(h + a.tr_mul(a) * self.sigma)
    }
}

/// `P(x, λ, σ)`, cross-checked between the branch and shifted forms.
pub fn eval_p(
    problem: &ProblemSpec,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
    sigma: f64,
) -> Result<f64, LagrangianError> {
    AugmentedLagrangian::new(problem, lambda, sigma)?.value(x)
}

/// `∇_x P(x, λ, σ)`.
pub fn grad_p(
    problem: &ProblemSpec,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
    sigma: f64,
) -> Result<DVector<f64>, LagrangianError> {
    Ok(AugmentedLagrangian::new(problem, lambda, sigma)?.gradient(x))
}

pub fn theta(
    problem: &ProblemSpec,
    x_next: &DVector<f64>,
    lambda: &DVector<f64>,
    sigma: f64,
) -> ThetaStat {
    let m_e = problem.m_e();
    let m = problem.m();
    let c = problem.constraints.values(x_next);
    let mult_over_sigma = inf_norm(lambda.iter()) / sigma;
    let eq_shifted_residual = (m_e > 0).then(|| {
        (0..m_e).fold(0.0f64, |acc, i| acc.max((c[i] - lambda[i] / sigma).abs()))
    });
    let ineq_violation =
        (m > m_e).then(|| (m_e..m).fold(0.0f64, |acc, i| acc.max(-c[i].min(0.0))));
    let value = mult_over_sigma
        .max(eq_shifted_residual.unwrap_or(0.0))
        .max(ineq_violation.unwrap_or(0.0));
    ThetaStat {
        value,
        mult_over_sigma,
        eq_shifted_residual,
        ineq_violation,
    }
}

/// Penalty update after outer iteration `k`. At `k = 0` the penalty is kept
/// and `theta_prev` is ignored.
pub fn update_penalty(k: usize, theta_next: f64, theta_prev: f64, state: &PenaltyState) -> PenaltyState {
    let mut next = *state;
    if k == 0 || theta_next <= state.gamma * theta_prev {
        return next;
    }
    let floor = match state.policy {
        PenaltyPolicy::PolynomialGrowth => ((k + 1) as f64).powf(state.alpha),
        PenaltyPolicy::GeometricGrowth => 4f64.powf((k + 1) as f64),
    };
    next.sigma = floor.max(state.sigma);
    next
}

/// `λ_i − σc_i(x)` on equalities, clamped at zero on inequalities.
pub fn update_multipliers(
    problem: &ProblemSpec,
    x_next: &DVector<f64>,
    lambda: &DVector<f64>,
    sigma: f64,
) -> DVector<f64> {
    let m_e = problem.m_e();
    let c = problem.constraints.values(x_next);
    DVector::from_iterator(
        c.len(),
        c.iter().zip(lambda.iter()).enumerate().map(|(i, (&ci, &li))| {
            let raw = li - sigma * ci;
            if i < m_e {
                raw
            } else {
                raw.max(0.0)
            }
        }),
    )
}

/// `‖μ‖₂ = ‖λ‖₂ / √σ`.
pub fn mu_norm(lambda: &DVector<f64>, sigma: f64) -> f64 {
    lambda.norm() / sigma.sqrt()
}

/// `√n (L1 + σ‖A‖_F²)`, a global 2-norm Lipschitz constant of `∇P(·, λ, σ)`
/// when all inequality rows of `A` are nonnegative.
pub fn lipschitz_bound_linear(
    l1: f64,
    sigma: f64,
    constraints: &ConstraintSet,
) -> Result<f64, LagrangianError> {
    let Some(frobenius_sq) = constraints.frobenius_sq() else {
        return Err(LagrangianError::UnsupportedSpecialization(
            "Lipschitz bound requires linear constraints".into(),
        ));
    };
    if !constraints.nonneg_ineq_rows() {
        return Err(LagrangianError::UnsupportedSpecialization(
            "Lipschitz bound requires nonnegative coefficients on inequality rows".into(),
        ));
    }
    Ok((constraints.n() as f64).sqrt() * (l1 + sigma * frobenius_sq))
}
