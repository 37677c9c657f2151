//! CSV and report writers. CSV rows carry 17-significant-digit floats,
//! comma separation and LF line endings; identical configs and seeds give
//! byte-identical files.

use std::io::Write;
use std::path::Path;

use rshe_core::bridge::format_float;
use rshe_core::experiments::ExperimentReport;
use rshe_core::{Error, Result};

pub fn float_cell(v: f64) -> String {
    format_float(v)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// Long-format estimate table: first column is the abscissa.
pub fn report_rows(reports: &[&ExperimentReport]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for report in reports {
        for e in &report.estimates {
            rows.push(vec![
                float_cell(e.x),
                format!("{}/{}", report.name, e.label),
                float_cell(e.value),
                float_cell(e.std_error),
                e.samples.to_string(),
            ]);
        }
    }
    rows
}

pub const REPORT_HEADER: [&str; 5] = ["t", "series", "value", "std_error", "samples"];

pub fn write_reports_json(path: &Path, reports: &[&ExperimentReport]) -> Result<()> {
    let json = serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(json.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}
