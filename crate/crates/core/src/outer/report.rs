use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunReport;

/// Column order of the per-iteration CSV trace.
pub const TRACE_COLUMNS: [&str; 10] = [
    "k",
    "f",
    "theta",
    "sigma",
    "mu_norm_sq",
    "inner_iters",
    "oracle_calls",
    "dual_inf",
    "primal_eq",
    "primal_ineq",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            _ => Err(format!("unknown format `{s}` (expected json, csv or both)")),
        }
    }
}

/// JSON and CSV paths derived from `out` by swapping the extension.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf) {
    (out.with_extension("json"), out.with_extension("csv"))
}

/// The trace as CSV text; θ is blank at `k = 0`.
pub fn trace_csv(report: &RunReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for s in &report.trace {
        let (inner_iters, oracle_calls) = s
            .inner
            .as_ref()
            .map_or((0, 0), |i| (i.iterations, i.oracle_calls));
        w.write_record([
            s.k.to_string(),
            s.f.to_string(),
            s.theta.map_or_else(String::new, |t| t.value.to_string()),
            s.sigma.to_string(),
            s.mu_norm_sq.to_string(),
            inner_iters.to_string(),
            oracle_calls.to_string(),
            s.kkt.dual_inf.to_string(),
            s.kkt.primal_eq.to_string(),
            s.kkt.primal_ineq.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Writes the report next to `out`; returns the paths written.
pub fn write_outputs(report: &RunReport, out: &Path, format: OutputFormat) -> io::Result<Vec<PathBuf>> {
    let (json_path, csv_path) = output_paths(out);
    let mut written = Vec::new();
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        let mut text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(&json_path, text)?;
        written.push(json_path);
    }
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        let text = trace_csv(report).map_err(io::Error::other)?;
        std::fs::write(&csv_path, text)?;
        written.push(csv_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::outer::solve;
    use crate::problem::corpus;

    #[test]
    fn csv_has_fixed_columns_and_blank_initial_theta() {
        let p = corpus::eq_qp(4).unwrap();
        let r = solve(&p, &SolverConfig::default()).unwrap();
        let text = trace_csv(&r).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
        let first: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0");
        assert_eq!(first[2], "");
        assert_eq!(text.lines().count(), r.trace.len() + 1);
    }

    #[test]
    fn paths_swap_extension() {
        let (j, c) = output_paths(Path::new("out/run.json"));
        assert_eq!(j, Path::new("out/run.json"));
        assert_eq!(c, Path::new("out/run.csv"));
        let (j, _) = output_paths(Path::new("run"));
        assert_eq!(j, Path::new("run.json"));
    }
}
