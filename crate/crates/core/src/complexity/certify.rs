use serde::Serialize;

use super::{bound_t_bounded, bound_t_unbounded, BoundInputs};
use crate::lagrangian::PenaltyPolicy;
use crate::outer::{RunReport, Termination};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    BoundedSigma,
    GrowingSigma,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertifyError {
    #[error("run terminated with {0:?}; certification needs an ε-KKT termination")]
    NotConverged(Termination),
    #[error("no closed-form outer bound is implemented for the geometric penalty policy")]
    UnsupportedPolicy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub regime: Regime,
    pub inputs: BoundInputs,
    /// Bound matching `regime`.
    pub bound_t: f64,
    pub bound_bounded: f64,
    pub bound_unbounded: f64,
    /// First `k ≥ 1` with θ^(k) ≤ ε/2.
    pub first_theta_hit: Option<usize>,
    /// Number of leading iterations `k = 1, 2, …` with θ^(k) > ε/2.
    pub exceedance_run: usize,
    /// Iterations `k` above the bounded-regime threshold with θ^(k) > ε/2.
    pub late_exceedances: Vec<usize>,
    /// The bounded-σ conclusion holds with σ_max taken from the run.
    pub bounded_holds: bool,
    /// The leading exceedance run is shorter than the unbounded-σ bound.
    pub unbounded_holds: bool,
    /// The check matching `regime` holds.
    pub certified: bool,
}

/// Checks the observed θ sequence of `report` against the outer bounds.
///
/// With bounded σ every `k` beyond the threshold must have θ^(k) ≤ ε/2, so
/// the first such `k` is at most its ceiling. With growing σ the leading run
/// of iterations with θ^(k) > ε/2 must be shorter than the unbounded-case
/// bound. Both bounds use `σ_max` = largest σ in the run.
pub fn certify_run(report: &RunReport) -> Result<Certificate, CertifyError> {
    if report.terminated != Termination::EpsKKT {
        return Err(CertifyError::NotConverged(report.terminated));
    }
    if report.config.penalty_policy != PenaltyPolicy::PolynomialGrowth {
        return Err(CertifyError::UnsupportedPolicy);
    }
    let inputs = BoundInputs::from_report(report);
    let half = 0.5 * inputs.eps;
    let sigma1 = report.trace.get(1).map_or(report.trace[0].sigma, |s| s.sigma);
    let regime = if report.trace.iter().skip(1).all(|s| s.sigma == sigma1) {
        Regime::BoundedSigma
    } else {
        Regime::GrowingSigma
    };

    let thetas: Vec<(usize, f64)> = report
        .trace
        .iter()
        .filter_map(|s| s.theta.map(|t| (s.k, t.value)))
        .collect();
    let first_theta_hit = thetas.iter().find(|(_, t)| *t <= half).map(|(k, _)| *k);
    let exceedance_run = thetas.iter().take_while(|(_, t)| *t > half).count();

    let bound_bounded = bound_t_bounded(&inputs);
    let bound_unbounded = bound_t_unbounded(&inputs);
    let late_exceedances: Vec<usize> = thetas
        .iter()
        .filter(|(k, t)| *k as f64 > bound_bounded && *t > half)
        .map(|(k, _)| *k)
        .collect();

    let reach = first_theta_hit.unwrap_or(report.t_outer) as f64;
    let bounded_holds = reach <= bound_bounded.ceil() && late_exceedances.is_empty();
    let unbounded_holds = (exceedance_run as f64) < bound_unbounded;
    let (bound_t, certified) = match regime {
        Regime::BoundedSigma => (bound_bounded, bounded_holds),
        Regime::GrowingSigma => (bound_unbounded, unbounded_holds),
    };
    Ok(Certificate {
        regime,
        inputs,
        bound_t,
        bound_bounded,
        bound_unbounded,
        first_theta_hit,
        exceedance_run,
        late_exceedances,
        bounded_holds,
        unbounded_holds,
        certified,
    })
}
