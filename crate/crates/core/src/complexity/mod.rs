//! Outer iteration bounds, their a posteriori certification, ε-sweeps and
//! growth-law fits. Logarithms are natural.

use serde::{Deserialize, Serialize};

mod certify;
mod fit;
mod sweep;

pub use certify::{certify_run, Certificate, CertifyError, Regime};
pub use fit::{fit_growth, FitError, GrowthFit, GrowthModel};
pub use sweep::{sweep, sweep_csv, SweepError, SweepResult, SweepRow, SWEEP_COLUMNS};

use crate::outer::RunReport;

/// Inputs shared by both outer iteration bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `‖μ^(0)‖₂²`.
    pub mu0_norm_sq: f64,
    /// `f(x0) − f_low`.
    pub f0_gap: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Largest σ observed in the run.
    pub sigma_max: f64,
}

impl BoundInputs {
    pub fn from_report(report: &RunReport) -> Self {
        Self {
            mu0_norm_sq: report.mu0_norm_sq,
            f0_gap: report.f0 - report.f_low,
            gamma: report.config.gamma,
            alpha: report.config.alpha,
            eps: report.config.eps,
            sigma_max: report.sigma_max(),
        }
    }

    /// `[½ log(‖μ^(0)‖² + 4 gap) + log 2 + |log ε|] / log(1/γ)`.
    pub fn log_term(&self) -> f64 {
        let scale = self.mu0_norm_sq + 4.0 * self.f0_gap;
        (0.5 * scale.ln() + 2f64.ln() + self.eps.ln().abs()) / (1.0 / self.gamma).ln()
    }

    /// `(4‖μ^(0)‖² + 16 gap)^{1/(α−1)} · ε^{−2/(α−1)}`.
    pub fn power_term(&self) -> f64 {
        let e = 1.0 / (self.alpha - 1.0);
        (4.0 * self.mu0_norm_sq + 16.0 * self.f0_gap).powf(e) * self.eps.powf(-2.0 * e)
    }
}

/// Iteration count beyond which θ ≤ ε/2 when σ stays below `sigma_max`.
pub fn bound_t_bounded(inputs: &BoundInputs) -> f64 {
    inputs.sigma_max.powf(1.0 / inputs.alpha) + 2.0 + inputs.log_term()
}

/// Strict upper bound on the number of initial iterations with θ > ε/2
/// when σ grows without bound.
pub fn bound_t_unbounded(inputs: &BoundInputs) -> f64 {
    4.0 + inputs.power_term() + inputs.log_term()
}
