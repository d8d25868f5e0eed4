use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pmcal_cli::{cmd_ingest, cmd_run, cmd_synth, CliResult, Outcome};

/// Calibrate and evaluate low-cost PM sensors against a reference monitor.
#[derive(Parser)]
#[command(name = "pmcal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate series CSV files and report completeness and corrupted rows.
    Ingest {
        files: Vec<PathBuf>,
        /// Grid interval in seconds; inferred from the data when omitted.
        #[arg(long)]
        interval: Option<i64>,
        /// Write normalized copies and ingest_report.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic collocated dataset from a scenario file.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Preprocess, cleanse, calibrate and evaluate.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Ingest { files, interval, out } => cmd_ingest(&files, interval, out.as_deref()),
        Command::Synth { config, seed, out } => cmd_synth(&config, seed, &out),
        Command::Run { config, out } => cmd_run(&config, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            for line in &outcome.report {
                println!("{line}");
            }
            if outcome.errors > 0 {
                eprintln!("{} error(s)", outcome.errors);
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
