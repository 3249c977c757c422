use rayon::prelude::*;
use serde::Serialize;

use super::certify_run;
use crate::config::SolverConfig;
use crate::outer::solve;
use crate::problem::ProblemSpec;

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: [&str; 7] = [
    "eps",
    "T_outer",
    "total_inner",
    "total_oracle_calls",
    "sigma_final",
    "bound_T",
    "certified",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    #[serde(rename = "T_outer")]
    pub t_outer: usize,
    pub total_inner: u64,
    pub total_oracle_calls: u64,
    pub sigma_final: f64,
    #[serde(rename = "bound_T")]
    pub bound_t: f64,
    pub certified: bool,
    /// Set when the solve or its certification failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    /// Sorted by descending ε.
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("the ε grid is empty")]
    EmptyGrid,
    #[error("grid value {0} is outside (0, 1)")]
    OutOfRange(f64),
    #[error("cannot build a thread pool: {0}")]
    ThreadPool(String),
}

fn run_row(problem: &ProblemSpec, base: &SolverConfig, eps: f64) -> SweepRow {
    let config = SolverConfig { eps, ..base.clone() };
    let failed = |error: String| SweepRow {
        eps,
        t_outer: 0,
        total_inner: 0,
        total_oracle_calls: 0,
        sigma_final: f64::NAN,
        bound_t: f64::NAN,
        certified: false,
        error: Some(error),
    };
    let report = match solve(problem, &config) {
        Ok(r) => r,
        Err(e) => return failed(e.to_string()),
    };
    let mut row = SweepRow {
        eps,
        t_outer: report.t_outer,
        total_inner: report.total_inner,
        total_oracle_calls: report.total_oracle_calls,
        sigma_final: report.final_state().sigma,
        bound_t: f64::NAN,
        certified: false,
        error: None,
    };
    match certify_run(&report) {
        Ok(cert) => {
            row.bound_t = cert.bound_t;
            row.certified = cert.certified;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One certified solve per grid value, run on up to `jobs` threads.
pub fn sweep(
    problem: &ProblemSpec,
    base_config: &SolverConfig,
    eps_grid: &[f64],
    jobs: usize,
) -> Result<SweepResult, SweepError> {
    if eps_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    if let Some(&bad) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(SweepError::OutOfRange(bad));
    }
    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SweepError::ThreadPool(e.to_string()))?;
    let rows = pool.install(|| {
        grid.par_iter()
            .map(|&eps| run_row(problem, base_config, eps))
            .collect()
    });
    Ok(SweepResult { rows })
}

pub fn sweep_csv(result: &SweepResult) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.eps.to_string(),
            r.t_outer.to_string(),
            r.total_inner.to_string(),
            r.total_oracle_calls.to_string(),
            r.sigma_final.to_string(),
            r.bound_t.to_string(),
            r.certified.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}
