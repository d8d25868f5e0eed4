//! Library side of the `pmcal` command: configuration files, the `ingest`,
//! `synth` and `run` commands, and the artifacts they write.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod ingest;
pub mod run;
pub mod synth;

use std::path::{Path, PathBuf};

pub use artifacts::Artifacts;
pub use config::Config;
pub use error::{CliError, CliResult};

/// What a command did, for the caller to print.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Human-readable report lines for stdout.
    pub report: Vec<String>,
    /// Diagnostics for stderr.
    pub diagnostics: Vec<String>,
    /// Number of error-severity diagnostics.
    pub errors: usize,
    pub written: Vec<PathBuf>,
}

/// Validates series files; with `out`, writes normalized copies and the
/// report table there.
pub fn cmd_ingest(paths: &[PathBuf], interval: Option<i64>, out: Option<&Path>) -> CliResult<Outcome> {
    let (reports, artifacts) = ingest::ingest(paths, interval);
    let mut outcome = Outcome::default();
    outcome.report.push(ingest::REPORT_HEADER.to_string());
    for r in &reports {
        outcome.report.push(ingest::report_row(r));
        if let Some(why) = &r.rejected {
            outcome.diagnostics.push(format!("error: rejected: {why}"));
            outcome.errors += 1;
        }
        for d in &r.diagnostics {
            outcome.diagnostics.push(format!("{}: {d}", r.path.display()));
        }
        outcome.errors += r
            .diagnostics
            .iter()
            .filter(|d| d.severity == pmcal::io::Severity::Error)
            .count();
    }
    if let Some(out) = out {
        outcome.written = artifacts.write_to(out)?;
    }
    Ok(outcome)
}

pub fn cmd_synth(config: &Path, seed: u64, out: &Path) -> CliResult<Outcome> {
    let spec = synth::SynthSpec::from_config(&Config::load(config)?)?;
    let artifacts = synth::synth(&spec, seed)?;
    let written = artifacts.write_to(out)?;
    Ok(Outcome {
        report: written.iter().map(|p| p.display().to_string()).collect(),
        written,
        ..Outcome::default()
    })
}

/// Runs the pipeline; `out` overrides `output.dir` from the config.
pub fn cmd_run(config: &Path, out: Option<&Path>) -> CliResult<Outcome> {
    let cfg = run::RunConfig::from_config(&Config::load(config)?)?;
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output.dir".into()))?;
    let result = run::run(&cfg)?;
    let mut outcome = Outcome::default();
    for (path, d) in &result.diagnostics {
        outcome.diagnostics.push(format!("{}: {d}", path.display()));
        if d.severity == pmcal::io::Severity::Error {
            outcome.errors += 1;
        }
    }
    outcome.written = result.artifacts.write_to(&out)?;
    if let Some(table) = result.artifacts.get("report.csv") {
        outcome.report.extend(table.lines().map(String::from));
    }
    Ok(outcome)
}
