//! Validation of series CSV files.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use pmcal::io::{self, Diagnostic, ParsedSeries, Severity};
use pmcal::timeseries::schedule;

use crate::artifacts::Artifacts;
use crate::error::{CliError, CliResult};

/// Device id for a series file: its stem.
pub fn device_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into())
}

pub fn load_series(path: &Path, interval: Option<i64>) -> CliResult<ParsedSeries<f64>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    io::read_series(BufReader::new(f), &device_id(path), interval).map_err(|e| CliError::input(path, e))
}

/// Outcome for one file.
#[derive(Clone, Debug, PartialEq)]
pub struct FileReport {
    pub path: PathBuf,
    /// Data rows in the file.
    pub rows: usize,
    /// Rows that parsed and sit on the grid.
    pub kept: usize,
    /// Kept rows marked invalid by an invariant breach.
    pub invalid: usize,
    /// Rows dropped as malformed, out of order or off the grid.
    pub malformed: usize,
    /// Percent of expected rows holding a valid sample.
    pub completeness: Option<f64>,
    pub diagnostics: Vec<Diagnostic>,
    /// Set when the whole file was rejected.
    pub rejected: Option<String>,
    pub parsed: Option<ParsedSeries<f64>>,
}

impl FileReport {
    pub fn has_errors(&self) -> bool {
        self.rejected.is_some() || self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }
}

/// Expected row count is the larger of the rows in the file and the grid
/// slots spanned by the kept samples, so both corrupted rows and gaps lower
/// completeness.
fn completeness(parsed: &ParsedSeries<f64>) -> Option<f64> {
    let s = &parsed.series;
    let (first, last) = (s.samples().first()?, s.samples().last()?);
    let slots = schedule(first.timestamp, last.timestamp + s.interval(), s.interval()).len();
    let expected = slots.max(parsed.rows);
    Some(100.0 * s.valid_count() as f64 / expected as f64)
}

pub fn check_file(path: &Path, interval: Option<i64>) -> FileReport {
    let mut report = FileReport {
        path: path.to_path_buf(),
        rows: 0,
        kept: 0,
        invalid: 0,
        malformed: 0,
        completeness: None,
        diagnostics: Vec::new(),
        rejected: None,
        parsed: None,
    };
    match load_series(path, interval) {
        Ok(parsed) => {
            report.rows = parsed.rows;
            report.kept = parsed.series.len();
            report.invalid = report.kept - parsed.series.valid_count();
            report.malformed = parsed.rows - report.kept;
            report.completeness = completeness(&parsed);
            report.diagnostics = parsed.diagnostics.clone();
            report.parsed = Some(parsed);
        }
        Err(e) => report.rejected = Some(e.to_string()),
    }
    report
}

pub const REPORT_HEADER: &str = "file,rows,kept,invalid,malformed,completeness,status";

pub fn report_row(r: &FileReport) -> String {
    let status = if r.rejected.is_some() {
        "rejected"
    } else if r.has_errors() {
        "errors"
    } else {
        "ok"
    };
    format!(
        "{},{},{},{},{},{},{status}",
        r.path.display(),
        r.rows,
        r.kept,
        r.invalid,
        r.malformed,
        r.completeness.map(|c| format!("{c:.1}")).unwrap_or_default()
    )
}

/// Validates each file. The artifacts hold `ingest_report.csv` plus a
/// normalized copy of every accepted file.
pub fn ingest(paths: &[PathBuf], interval: Option<i64>) -> (Vec<FileReport>, Artifacts) {
    let reports: Vec<FileReport> = paths.iter().map(|p| check_file(p, interval)).collect();
    let mut artifacts = Artifacts::new();
    let mut table = format!("{REPORT_HEADER}\n");
    for r in &reports {
        table.push_str(&report_row(r));
        table.push('\n');
        if let Some(parsed) = &r.parsed {
            artifacts.add(format!("{}.csv", device_id(&r.path)), io::series_to_csv(&parsed.series));
        }
    }
    artifacts.add("ingest_report.csv", table);
    (reports, artifacts)
}
