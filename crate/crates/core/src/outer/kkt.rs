use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::lagrangian::{lagrangian_grad, sign_ok};
use crate::problem::ProblemSpec;

/// ε-KKT residuals of a primal-dual pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `‖∇_x L(x, λ)‖_∞`.
    pub dual_inf: f64,
    /// `‖c_E(x)‖_∞`.
    pub primal_eq: f64,
    /// `‖c_I^(−)(x)‖_∞`.
    pub primal_ineq: f64,
    pub sign_ok: bool,
    /// `λ_i = 0` whenever `c_i(x) > ε` on inequality rows.
    pub compl_ok: bool,
    pub is_eps_kkt: bool,
}

impl KktReport {
    pub fn worst_residual(&self) -> f64 {
        self.dual_inf.max(self.primal_eq).max(self.primal_ineq)
    }
}

pub fn kkt_check(problem: &ProblemSpec, x: &DVector<f64>, lambda: &DVector<f64>, eps: f64) -> KktReport {
    let m_e = problem.m_e();
    let c = problem.constraints.values(x);
    let dual_inf = lagrangian_grad(problem, x, lambda).amax();
    let (primal_eq, primal_ineq) = problem.constraints.violation(&c);
    let sign_ok = sign_ok(lambda, m_e);
    let compl_ok = (m_e..problem.m()).all(|i| c[i] <= eps || lambda[i] == 0.0);
    let is_eps_kkt = dual_inf <= eps && primal_eq <= eps && primal_ineq <= eps && sign_ok && compl_ok;
    KktReport {
        dual_inf,
        primal_eq,
        primal_ineq,
        sign_ok,
        compl_ok,
        is_eps_kkt,
    }
}
