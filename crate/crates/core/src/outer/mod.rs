//! The outer augmented Lagrangian loop.

use nalgebra::DVector;
use serde::Serialize;

use crate::config::{ConfigError, MonitorMode, SolverConfig};
use crate::inner::{self, InnerMethod, InnerResult, InnerTask};
use crate::lagrangian::{
    lipschitz_bound_linear, mu_norm, sign_ok, theta, update_multipliers, update_penalty,
    AugmentedLagrangian, LagrangianError, PenaltyState, ThetaStat,
};
use crate::problem::{ProblemSpec, FEASIBILITY_TOL};

mod kkt;
mod monitor;
mod report;

pub use kkt::{kkt_check, KktReport};
pub use monitor::{
    inner_budget, monitor_step, p_low, MonitorRecord, DUAL_IDENTITY_TOL, FIRST_ORDER_BUDGET_C,
    MONITOR_SLACK, SECOND_ORDER_BUDGET_C,
};
pub use report::{output_paths, trace_csv, write_outputs, OutputFormat, TRACE_COLUMNS};

/// The solve stops once σ exceeds this value.
pub const SIGMA_LIMIT: f64 = 1e16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    EpsKKT,
    MaxOuter,
    InnerFailure,
    /// σ grew past [`SIGMA_LIMIT`].
    PenaltyLimit,
    /// A strict-mode monitor failed.
    MonitorViolation,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("starting point is infeasible: ‖c_E(x0)‖∞ = {eq:e}, ‖c_I⁻(x0)‖∞ = {ineq:e}")]
    InfeasibleStart { eq: f64, ineq: f64 },
    #[error("declared f_low = {f_low} exceeds f(x0) = {f0}")]
    InvalidLowerBound { f0: f64, f_low: f64 },
    #[error("invalid initial multipliers: {0}")]
    InvalidMultipliers(String),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error("monitor `{}` failed at iteration {}: {:e} > {:e}", .record.check, .record.iteration, .record.lhs, .record.rhs)]
    MonitorViolation {
        record: MonitorRecord,
        report: Box<RunReport>,
    },
}

/// Statistics of one inner solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerSummary {
    pub method: InnerMethod,
    pub iterations: u64,
    pub rejected_steps: u64,
    pub oracle_calls: u64,
    pub value_start: f64,
    pub value_final: f64,
    pub grad_norm2: f64,
    pub decrease: f64,
    pub accepted: bool,
    pub monotone: bool,
    /// Lipschitz constant handed to the solver.
    pub lipschitz: Option<f64>,
}

impl InnerSummary {
    fn new(method: InnerMethod, result: &InnerResult, lipschitz: Option<f64>) -> Self {
        Self {
            method,
            iterations: result.iterations,
            rejected_steps: result.rejected_steps,
            oracle_calls: result.oracle_calls,
            value_start: result.value_start,
            value_final: result.value_final,
            grad_norm2: result.grad_norm2,
            decrease: result.decrease,
            accepted: result.accepted,
            monotone: result.monotone,
            lipschitz,
        }
    }
}

/// `(x_k, λ^(k), σ^(k))` with the statistics of the step that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterState {
    pub k: usize,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma: f64,
    /// θ^(k); absent at `k = 0`.
    pub theta: Option<ThetaStat>,
    pub mu_norm_sq: f64,
    pub f: f64,
    pub kkt: KktReport,
    pub inner: Option<InnerSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub n: usize,
    pub m: usize,
    pub m_e: usize,
    pub config: SolverConfig,
    pub inner_method: InnerMethod,
    pub f0: f64,
    pub f_low: f64,
    pub mu0_norm_sq: f64,
    pub trace: Vec<OuterState>,
    pub kkt: KktReport,
    #[serde(rename = "T_outer")]
    pub t_outer: usize,
    pub total_inner: u64,
    pub total_oracle_calls: u64,
    pub monitor_log: Vec<MonitorRecord>,
    pub monitor_failures: usize,
    pub terminated: Termination,
    pub failure: Option<String>,
}

impl RunReport {
    pub fn final_state(&self) -> &OuterState {
        self.trace.last().expect("a report always holds the initial state")
    }

    pub fn sigma_max(&self) -> f64 {
        self.trace.iter().fold(0.0, |acc, s| acc.max(s.sigma))
    }

    pub fn final_theta(&self) -> Option<f64> {
        self.final_state().theta.map(|t| t.value)
    }
}

fn initial_multipliers(problem: &ProblemSpec, config: &SolverConfig) -> Result<DVector<f64>, SolveError> {
    let m = problem.m();
    let lambda = match &config.lambda0 {
        None => DVector::zeros(m),
        Some(l) if l.len() == m => DVector::from_column_slice(l),
        Some(l) => {
            return Err(SolveError::InvalidMultipliers(format!(
                "lambda0 has length {}, expected {m}",
                l.len()
            )))
        }
    };
    if !sign_ok(&lambda, problem.m_e()) {
        return Err(SolveError::InvalidMultipliers(
            "inequality multipliers must be nonnegative".into(),
        ));
    }
    Ok(lambda)
}

struct RunState {
    trace: Vec<OuterState>,
    monitor_log: Vec<MonitorRecord>,
    total_inner: u64,
    total_oracle_calls: u64,
}

fn finish(
    problem: &ProblemSpec,
    config: &SolverConfig,
    method: InnerMethod,
    mu0_norm_sq: f64,
    run: RunState,
    terminated: Termination,
    failure: Option<String>,
) -> RunReport {
    let last = run.trace.last().expect("initial state present");
    RunReport {
        problem: problem.name.clone(),
        n: problem.n(),
        m: problem.m(),
        m_e: problem.m_e(),
        config: config.clone(),
        inner_method: method,
        f0: run.trace[0].f,
        f_low: problem.objective.f_low,
        mu0_norm_sq,
        kkt: last.kkt,
        t_outer: run.trace.len() - 1,
        total_inner: run.total_inner,
        total_oracle_calls: run.total_oracle_calls,
        monitor_failures: run.monitor_log.iter().filter(|r| !r.pass).count(),
        monitor_log: run.monitor_log,
        trace: run.trace,
        terminated,
        failure,
    }
}

/// Runs the augmented Lagrangian method on `problem`.
///
/// Each outer iteration minimizes `P(·, λ^(k), σ^(k))` from the better of
/// `x0` and `x_k` until `‖∇P‖₂ ≤ ε`, then updates σ and λ. The run stops at
/// the first `k ≥ 1` whose pair `(x_k, λ^(k))` is an ε-KKT point.
pub fn solve(problem: &ProblemSpec, config: &SolverConfig) -> Result<RunReport, SolveError> {
    config.validate()?;
    let method = config.resolve_inner(problem)?;
    let (eq, ineq) = problem.violation(&problem.x0);
    if eq > FEASIBILITY_TOL || ineq > FEASIBILITY_TOL {
        return Err(SolveError::InfeasibleStart { eq, ineq });
    }
    let x0 = problem.x0.clone();
    let f0 = problem.objective.value(&x0);
    let f_low = problem.objective.f_low;
    if !(f0 >= f_low) {
        return Err(SolveError::InvalidLowerBound { f0, f_low });
    }
    let gap = f0 - f_low;
    let eps = config.eps;
    let eps_in = config.inner_eps();

    let mut lambda = initial_multipliers(problem, config)?;
    let mut penalty = PenaltyState {
        sigma: config.sigma0,
        alpha: config.alpha,
        gamma: config.gamma,
        policy: config.penalty_policy,
    };
    let mu0_norm_sq = mu_norm(&lambda, penalty.sigma).powi(2);
    let mut x = x0.clone();
    let mut run = RunState {
        trace: vec![OuterState {
            k: 0,
            x: x.iter().copied().collect(),
            lambda: lambda.iter().copied().collect(),
            sigma: penalty.sigma,
            theta: None,
            mu_norm_sq: mu0_norm_sq,
            f: f0,
            kkt: kkt_check(problem, &x, &lambda, eps),
            inner: None,
        }],
        monitor_log: Vec::new(),
        total_inner: 0,
        total_oracle_calls: 0,
    };
    let mut theta_prev = f64::INFINITY;

    let mut k = 0usize;
    loop {
        if k >= config.max_outer {
            return Ok(finish(problem, config, method, mu0_norm_sq, run, Termination::MaxOuter, None));
        }
        if penalty.sigma > SIGMA_LIMIT {
            let msg = format!("σ = {:e} exceeds {SIGMA_LIMIT:e} without an ε-KKT point", penalty.sigma);
            return Ok(finish(problem, config, method, mu0_norm_sq, run, Termination::PenaltyLimit, Some(msg)));
        }

        let sigma = penalty.sigma;
        let start = inner::warm_start(problem, &lambda, sigma, &x0, &x)?;
        let function = AugmentedLagrangian::new(problem, &lambda, sigma)?;
        let lipschitz = match method {
            InnerMethod::FixedStepGd => {
                let l1 = problem.objective.global_l1().expect("checked by resolve_inner");
                Some(lipschitz_bound_linear(l1, sigma, &problem.constraints)?)
            }
            InnerMethod::CubicNewton => problem.objective.global_l2(),
            InnerMethod::BacktrackingGd => None,
        };
        let task = InnerTask::new(&function, start, eps_in)
            .with_lipschitz(lipschitz)
            .with_lower_bound(Some(p_low(f_low, mu0_norm_sq, gap, k)));
        let result = match inner::run(method, &task) {
            Ok(r) => r,
            Err(e) => {
                let msg = format!("inner solve at outer iteration {k} failed: {e}");
                log::warn!("{msg}");
                return Ok(finish(problem, config, method, mu0_norm_sq, run, Termination::InnerFailure, Some(msg)));
            }
        };
        run.total_inner += result.iterations;
        run.total_oracle_calls += result.oracle_calls;

        let x_next = result.x_final.clone();
        let th = theta(problem, &x_next, &lambda, sigma);
        let next_penalty = update_penalty(k, th.value, theta_prev, &penalty);
        let lambda_next = update_multipliers(problem, &x_next, &lambda, sigma);
        let kkt = kkt_check(problem, &x_next, &lambda_next, eps);
        let next = OuterState {
            k: k + 1,
            x: x_next.iter().copied().collect(),
            lambda: lambda_next.iter().copied().collect(),
            sigma: next_penalty.sigma,
            theta: Some(th),
            mu_norm_sq: mu_norm(&lambda_next, next_penalty.sigma).powi(2),
            f: problem.objective.value(&x_next),
            kkt,
            inner: Some(InnerSummary::new(method, &result, lipschitz)),
        };
        let records = monitor_step(run.trace.last().expect("nonempty trace"), &next, problem, config)?;
        let violation = records.iter().find(|r| !r.pass).cloned();
        log::info!(
            "k={} f={:.6e} θ={:.3e} σ={:.3e} inner={} dual={:.3e}",
            k + 1,
            next.f,
            th.value,
            next.sigma,
            result.iterations,
            kkt.dual_inf
        );
        for r in records.iter().filter(|r| !r.pass) {
            log::warn!("monitor {} failed at iteration {}: {:e} > {:e}", r.check, r.iteration, r.lhs, r.rhs);
        }
        run.monitor_log.extend(records);
        run.trace.push(next);

        if let (Some(record), MonitorMode::Strict) = (violation, config.monitor) {
            let msg = format!("monitor `{}` failed at iteration {}", record.check, record.iteration);
            let report = finish(problem, config, method, mu0_norm_sq, run, Termination::MonitorViolation, Some(msg));
            return Err(SolveError::MonitorViolation {
                record,
                report: Box::new(report),
            });
        }

        x = x_next;
        lambda = lambda_next;
        penalty = next_penalty;
        theta_prev = th.value;
        k += 1;
        if kkt.is_eps_kkt {
            return Ok(finish(problem, config, method, mu0_norm_sq, run, Termination::EpsKKT, None));
        }
    }
}
