use serde::{Deserialize, Serialize};

use super::SweepResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthModel {
    /// `T_outer ≈ a + b·|log ε|`.
    LogLinear,
    /// `total_inner ≈ a·ε^{−b}`, fitted as `log count = log a + b·log(1/ε)`.
    PowerLaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    /// Intercept `a` (for the power law, the prefactor `a`).
    pub coefficient: f64,
    /// Slope or exponent `b`.
    pub exponent_or_slope: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("a fit needs at least 3 successful rows, got {0}")]
    TooFewRows(usize),
    #[error("degenerate design: all ε values are equal")]
    Degenerate,
    #[error("power-law fits need positive counts")]
    NonPositiveCount,
}

/// Least-squares `y ≈ a + b·t`; returns `(a, b, R²)`.
fn least_squares(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64), FitError> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    if !(stt > 1e-12 * tm.abs().max(1.0).powi(2)) {
        return Err(FitError::Degenerate);
    }
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let ss_tot: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let ss_res: f64 = t
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    // A constant response is fitted exactly.
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((intercept, slope, r_squared))
}

/// Fits a growth law to the successful rows of `result`.
pub fn fit_growth(result: &SweepResult, model: GrowthModel) -> Result<GrowthFit, FitError> {
    let rows: Vec<_> = result.rows.iter().filter(|r| r.error.is_none()).collect();
    if rows.len() < 3 {
        return Err(FitError::TooFewRows(rows.len()));
    }
    let (t, y): (Vec<f64>, Vec<f64>) = match model {
        GrowthModel::LogLinear => rows.iter().map(|r| (r.eps.ln().abs(), r.t_outer as f64)).unzip(),
        GrowthModel::PowerLaw => {
            if rows.iter().any(|r| r.total_inner == 0) {
                return Err(FitError::NonPositiveCount);
            }
            rows.iter()
                .map(|r| ((1.0 / r.eps).ln(), (r.total_inner as f64).ln()))
                .unzip()
        }
    };
    let (a, b, r_squared) = least_squares(&t, &y)?;
    let coefficient = match model {
        GrowthModel::LogLinear => a,
        GrowthModel::PowerLaw => a.exp(),
    };
    Ok(GrowthFit {
        model,
        coefficient,
        exponent_or_slope: b,
        r_squared,
        points: rows.len(),
    })
}
