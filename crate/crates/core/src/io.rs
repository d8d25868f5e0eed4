//! CSV formats.
//!
//! Series files have the header `timestamp,pm1,pm25,pm10,temp,rh`, with an
//! optional trailing `adc` column. Timestamps are UTC `YYYY-MM-DDTHH:MM:SSZ`,
//! an empty field is a missing value, and lines end in LF. Numbers are
//! written in shortest round-trip form, so a written file parses back to
//! the same values.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime};

use crate::cleanse::AuditRow;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::timeseries::{Channel, IntervalMask, Sample, Series, Timestamp};

pub const SERIES_HEADER: [&str; 6] = ["timestamp", "pm1", "pm25", "pm10", "temp", "rh"];
const TS_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

pub fn format_timestamp(ts: Timestamp) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|d| d.format(TS_FORMAT).to_string())
        .unwrap_or_else(|| ts.to_string())
}

pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    NaiveDateTime::parse_from_str(s.trim(), TS_FORMAT)
        .ok()
        .map(|d| d.and_utc().timestamp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

/// A problem found while reading a file, tied to a 1-based line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u64,
    pub severity: Severity,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.severity.as_str(), self.message)
    }
}

/// Result of [`read_series`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSeries<T> {
    pub series: Series<T>,
    pub diagnostics: Vec<Diagnostic>,
    /// Data rows in the file, including skipped ones.
    pub rows: usize,
}

impl<T> ParsedSeries<T> {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }
}

/// Reads a series CSV. A bad header rejects the file. Malformed rows are
/// skipped with an error diagnostic; rows breaking a physical invariant are
/// kept, marked invalid and reported as warnings.
///
/// Without an explicit `interval`, the smallest gap between consecutive
/// timestamps is used.
pub fn read_series<T: Real, R: Read>(reader: R, device_id: &str, interval: Option<i64>) -> Result<ParsedSeries<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: format!("unreadable header: {e}"),
    })?;
    let fields: Vec<&str> = header.iter().collect();
    let has_adc = match fields.as_slice() {
        f if f == SERIES_HEADER => false,
        [head @ .., "adc"] if head == SERIES_HEADER => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "header must be '{}' with optional ',adc', got '{}'",
                    SERIES_HEADER.join(","),
                    fields.join(",")
                ),
            })
        }
    };
    let width = SERIES_HEADER.len() + usize::from(has_adc);
    let channels = [
        Channel::Pm1,
        Channel::Pm25,
        Channel::Pm10,
        Channel::Temp,
        Channel::Rh,
        Channel::Adc,
    ];

    let mut diagnostics = Vec::new();
    let mut samples: Vec<(u64, Sample<T>)> = Vec::new();
    let mut rows = 0;
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line() + 1;
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                rows += 1;
                diagnostics.push(Diagnostic {
                    line,
                    severity: Severity::Error,
                    message: format!("unreadable row: {e}"),
                });
                continue;
            }
        }
        rows += 1;
        let line = record.position().map_or(line, |p| p.line());
        let mut error = |message: String| {
            diagnostics.push(Diagnostic {
                line,
                severity: Severity::Error,
                message,
            })
        };
        if record.len() != width {
            error(format!("expected {width} fields, found {}", record.len()));
            continue;
        }
        let Some(ts) = parse_timestamp(&record[0]) else {
            error(format!("invalid timestamp '{}'", &record[0]));
            continue;
        };
        let mut sample = Sample::new(ts);
        let mut bad = None;
        for (i, &ch) in channels.iter().take(width - 1).enumerate() {
            let raw = &record[i + 1];
            if raw.is_empty() {
                continue;
            }
            match raw.parse::<T>() {
                Ok(v) => sample.set(ch, Some(v)),
                Err(_) => {
                    bad = Some(format!("{} is not a number: '{raw}'", ch.name()));
                    break;
                }
            }
        }
        if let Some(msg) = bad {
            error(msg);
            continue;
        }
        if let Some((_, prev)) = samples.last() {
            if ts <= prev.timestamp {
                error(format!("timestamp {} does not increase", &record[0]));
                continue;
            }
        }
        let breaches = sample.breaches();
        if !breaches.is_empty() {
            let list: Vec<String> = breaches.iter().map(|b| b.to_string()).collect();
            diagnostics.push(Diagnostic {
                line,
                severity: Severity::Warning,
                message: format!("row marked invalid: {}", list.join("; ")),
            });
        }
        samples.push((line, sample.validated()));
    }

    let interval = match interval {
        Some(i) => i,
        None => samples
            .windows(2)
            .map(|w| w[1].1.timestamp - w[0].1.timestamp)
            .min()
            .ok_or_else(|| {
                Error::Config(format!(
                    "cannot infer the interval of '{device_id}' from fewer than 2 rows"
                ))
            })?,
    };
    if interval <= 0 {
        return Err(Error::Config(format!("interval must be positive, got {interval}")));
    }
    let phase = samples.first().map(|s| s.1.timestamp.rem_euclid(interval));
    let mut kept = Vec::with_capacity(samples.len());
    for (line, s) in samples {
        if Some(s.timestamp.rem_euclid(interval)) != phase {
            diagnostics.push(Diagnostic {
                line,
                severity: Severity::Error,
                message: format!(
                    "timestamp {} is off the {interval} s grid",
                    format_timestamp(s.timestamp)
                ),
            });
            continue;
        }
        kept.push(s);
    }
    diagnostics.sort_by_key(|d| d.line);
    Ok(ParsedSeries {
        series: Series::new(device_id, interval, kept)?,
        diagnostics,
        rows,
    })
}

fn cell<T: Real>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Serializes a series. The `adc` column is written when any sample has it.
pub fn series_to_csv<T: Real>(series: &Series<T>) -> String {
    let has_adc = series.samples().iter().any(|s| s.adc.is_some());
    let mut out = SERIES_HEADER.join(",");
    if has_adc {
        out.push_str(",adc");
    }
    out.push('\n');
    for s in series.samples() {
        let mut fields = vec![
            format_timestamp(s.timestamp),
            cell(s.pm1),
            cell(s.pm25),
            cell(s.pm10),
            cell(s.temp),
            cell(s.rh),
        ];
        if has_adc {
            fields.push(cell(s.adc));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_series<T: Real, W: Write>(series: &Series<T>, mut w: W) -> Result<()> {
    w.write_all(series_to_csv(series).as_bytes())?;
    Ok(())
}

/// Reads a mask file with header `start,end` (ISO timestamps, end exclusive).
pub fn read_mask<R: Read>(reader: R) -> Result<IntervalMask> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != ["start", "end"] {
        return Err(Error::Parse {
            line: 1,
            message: "mask header must be 'start,end'".into(),
        });
    }
    let mut windows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let ts = |i: usize| {
            rec.get(i).and_then(parse_timestamp).ok_or_else(|| Error::Parse {
                line,
                message: format!("invalid timestamp '{}'", rec.get(i).unwrap_or("")),
            })
        };
        windows.push((ts(0)?, ts(1)?));
    }
    IntervalMask::new(windows)
}

pub fn mask_to_csv(mask: &IntervalMask) -> String {
    let mut out = String::from("start,end\n");
    for &(a, b) in mask.windows() {
        out.push_str(&format!("{},{}\n", format_timestamp(a), format_timestamp(b)));
    }
    out
}

/// Ground-truth labels: header `timestamp,fog_flag`, one row per flagged
/// timestamp.
pub fn labels_to_csv(labels: &[Timestamp]) -> String {
    let mut out = String::from("timestamp,fog_flag\n");
    for &ts in labels {
        out.push_str(&format_timestamp(ts));
        out.push_str(",1\n");
    }
    out
}

/// Reads a labels file, returning the timestamps whose flag is 1.
pub fn read_labels<R: Read>(reader: R) -> Result<Vec<Timestamp>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let ts = rec.get(0).and_then(parse_timestamp).ok_or_else(|| Error::Parse {
            line,
            message: "invalid timestamp".into(),
        })?;
        if rec.get(1) == Some("1") {
            out.push(ts);
        }
    }
    Ok(out)
}

/// Cleanser audit: `timestamp,ratio,window_mean,window_sd,verdict,note`.
pub fn audit_to_csv<T: Real>(audit: &[AuditRow<T>]) -> String {
    let mut out = String::from("timestamp,ratio,window_mean,window_sd,verdict,note\n");
    for row in audit {
        let d = &row.decision;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_timestamp(row.timestamp),
            cell(d.ratio),
            d.window_mean,
            d.window_sd,
            d.verdict,
            d.note.map(|n| n.as_str()).unwrap_or("")
        ));
    }
    out
}
