//! Per-iteration checks of the inequalities the convergence analysis relies on.

use nalgebra::DVector;
use serde::Serialize;

use super::{InnerSummary, OuterState};
use crate::config::SolverConfig;
use crate::inner::InnerMethod;
use crate::lagrangian::{eval_p, grad_p, lagrangian_grad, mu_norm, LagrangianError};
use crate::problem::ProblemSpec;

/// Relative slack of the inequality checks.
pub const MONITOR_SLACK: f64 = 1e-9;
/// Absolute tolerance of the dual-residual identity.
pub const DUAL_IDENTITY_TOL: f64 = 1e-12;
/// Constant of the first-order inner budget.
pub const FIRST_ORDER_BUDGET_C: f64 = 4.0;
/// Constant of the second-order inner budget.
pub const SECOND_ORDER_BUDGET_C: f64 = 10.0;

/// One evaluated check: `lhs ≤ rhs` (with slack where noted).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub iteration: usize,
    pub check: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

fn with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + MONITOR_SLACK * rhs.abs().max(1.0)
}

/// Lower bound of `P(·, λ^(k), σ^(k))` valid at outer iteration `k`:
/// `f_low − ½‖μ^(0)‖² − (f(x0) − f_low)·k`.
pub fn p_low(f_low: f64, mu0_norm_sq: f64, f0_gap: f64, k: usize) -> f64 {
    f_low - 0.5 * mu0_norm_sq - f0_gap * k as f64
}

/// Iteration budget of the inner solver at outer iteration `k`, when one applies.
pub fn inner_budget(summary: &InnerSummary, p_low: f64, eps: f64, problem: &ProblemSpec) -> Option<f64> {
    let gap = summary.value_start - p_low;
    match summary.method {
        InnerMethod::FixedStepGd => {
            let l = summary.lipschitz?;
            Some(FIRST_ORDER_BUDGET_C * l * gap / (eps * eps))
        }
        InnerMethod::CubicNewton => {
            // A zero Hessian Lipschitz constant makes the budget vacuous.
            let l2 = problem.objective.global_l2().filter(|&l| l > 0.0)?;
            Some(SECOND_ORDER_BUDGET_C * l2.sqrt() * gap * eps.powf(-1.5))
        }
        InnerMethod::BacktrackingGd => None,
    }
}

/// Checks produced by the step from `prev` (iteration `k`) to `next` (`k + 1`).
pub fn monitor_step(
    prev: &OuterState,
    next: &OuterState,
    problem: &ProblemSpec,
    config: &SolverConfig,
) -> Result<Vec<MonitorRecord>, LagrangianError> {
    let k = prev.k;
    let iteration = next.k;
    let m_e = problem.m_e();
    let x0 = &problem.x0;
    let x_prev = DVector::from_column_slice(&prev.x);
    let x_next = DVector::from_column_slice(&next.x);
    let lambda = DVector::from_column_slice(&prev.lambda);
    let lambda_next = DVector::from_column_slice(&next.lambda);
    let sigma = prev.sigma;

    let f0 = problem.objective.value(x0);
    let f_low = problem.objective.f_low;
    let gap = f0 - f_low;
    let lambda0 = config
        .lambda0
        .as_ref()
        .map_or_else(|| DVector::zeros(problem.m()), |l| DVector::from_column_slice(l));
    let mu0_sq = mu_norm(&lambda0, config.sigma0).powi(2);

    let mut out = Vec::new();
    let mut push = |check: &'static str, lhs: f64, rhs: f64, pass: bool| {
        out.push(MonitorRecord {
            iteration,
            check,
            lhs,
            rhs,
            pass,
        });
    };

    let mu_rhs = mu0_sq + 2.0 * gap * iteration as f64;
    push("mu-growth", next.mu_norm_sq, mu_rhs, with_slack(next.mu_norm_sq, mu_rhs));

    if k >= 1 {
        if let Some(theta) = next.theta {
            let rhs = k as f64 * (mu0_sq + 4.0 * gap);
            let feas = theta
                .eq_shifted_residual
                .unwrap_or(0.0)
                .max(theta.ineq_violation.unwrap_or(0.0));
            let lhs = sigma * feas * feas;
            push("feasibility-decay", lhs, rhs, with_slack(lhs, rhs));
            let lhs = sigma * theta.value * theta.value;
            push("theta-decay", lhs, rhs, with_slack(lhs, rhs));
        }
    }

    let p_next = eval_p(problem, &x_next, &lambda, sigma)?;
    let p_prev = eval_p(problem, &x_prev, &lambda, sigma)?;
    let p_x0 = eval_p(problem, x0, &lambda, sigma)?;
    let rhs = p_prev.min(p_x0);
    push("warm-start-descent", p_next, rhs, with_slack(p_next, rhs));
    push("upper-bound-at-x0", p_x0, f0, with_slack(p_x0, f0));

    let f_next = problem.objective.value(&x_next);
    let lower = f_next - 0.5 * lambda.norm_squared() / sigma;
    push("lower-bound", lower, p_next, with_slack(lower, p_next));

    let dual = lagrangian_grad(problem, &x_next, &lambda_next);
    let identity = (&dual - grad_p(problem, &x_next, &lambda, sigma)?).amax();
    push("dual-identity", identity, DUAL_IDENTITY_TOL, identity <= DUAL_IDENTITY_TOL);
    let dual_inf = dual.amax();
    let eps_in = config.inner_eps();
    push("dual-residual", dual_inf, eps_in, with_slack(dual_inf, eps_in));

    let worst_sign = lambda_next.iter().skip(m_e).fold(0.0f64, |acc, &l| acc.max(-l));
    push("multiplier-sign", worst_sign, 0.0, worst_sign <= 0.0);
    push("penalty-monotone", sigma, next.sigma, sigma <= next.sigma);
    push("objective-lower-bound", f_low, f_next, f_low <= f_next);

    if let Some(theta) = next.theta {
        let half = 0.5 * config.eps;
        if theta.value <= half && eps_in <= config.eps {
            push("theta-sufficiency", next.kkt.worst_residual(), config.eps, next.kkt.is_eps_kkt);
        }
    }

    if let Some(summary) = &next.inner {
        let low = p_low(f_low, mu0_sq, gap, k);
        if let Some(budget) = inner_budget(summary, low, eps_in, problem) {
            let used = summary.iterations as f64;
            push("inner-budget", used, budget, used <= budget);
        }
    }

    Ok(out)
}
