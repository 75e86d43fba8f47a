//! CSV and JSON rendering of experiment results.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::experiment::{SuccessEstimate, SweepResult, TableResult};
use crate::error::{CboError, Result};
use crate::serde_inf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = CboError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(CboError::config(format!("format: expected csv or json, got `{other}`"))),
        }
    }
}

/// Anything the harness can write out.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;

    fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CboError::Serialization(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

const ESTIMATE_COLUMNS: &str = "rate,runs,ci_lo,ci_hi";

fn estimate_fields(e: Option<&SuccessEstimate>) -> String {
    match e {
        Some(e) => format!("{},{},{},{}", e.rate, e.runs, e.wilson_ci_95.0, e.wilson_ci_95.1),
        None => ",,,".to_string(),
    }
}

impl Report for SuccessEstimate {
    fn to_csv(&self) -> String {
        format!("{ESTIMATE_COLUMNS}\n{}\n", estimate_fields(Some(self)))
    }
}

fn sweep_rows(sweep: &SweepResult, prefix: &str, out: &mut String) {
    for cell in &sweep.cells {
        out.push_str(prefix);
        for v in &cell.coords {
            out.push_str(&serde_inf::format(*v));
            out.push(',');
        }
        out.push_str(&estimate_fields(cell.estimate.as_ref()));
        out.push('\n');
    }
}

fn axis_header(sweep: &SweepResult) -> String {
    sweep.axes.iter().map(|a| format!("{},", a.param.name())).collect()
}

impl Report for SweepResult {
    fn to_csv(&self) -> String {
        let mut out = format!("{}{ESTIMATE_COLUMNS}\n", axis_header(self));
        sweep_rows(self, "", &mut out);
        out
    }
}

impl Report for TableResult {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(first) = self.sweeps.first() {
            let _ = writeln!(out, "objective,{}{ESTIMATE_COLUMNS}", axis_header(first));
        }
        for sweep in &self.sweeps {
            sweep_rows(sweep, &format!("{},", sweep.metadata.objective), &mut out);
        }
        out
    }
}

pub fn render_report<R: Report + ?Sized>(report: &R, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => Ok(report.to_csv()),
        ReportFormat::Json => report.to_json(),
    }
}

/// Writes `report` to `path`. Output bytes depend only on the report.
pub fn emit_report<R: Report + ?Sized>(report: &R, format: ReportFormat, path: &Path) -> Result<()> {
    let text = render_report(report, format)?;
    std::fs::write(path, text).map_err(|source| CboError::Io { path: path.to_path_buf(), source })
}
