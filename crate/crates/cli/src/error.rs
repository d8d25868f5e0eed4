use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: pmcal::Error,
    },
    #[error("stage '{stage}' failed for '{target}': {source}")]
    Stage {
        stage: &'static str,
        target: String,
        #[source]
        source: pmcal::Error,
    },
    #[error(transparent)]
    Core(#[from] pmcal::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path, source: pmcal::Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Wraps a core error as a failure of the pipeline stage `stage`.
    pub fn stage<'a>(stage: &'static str, target: &'a str) -> impl FnOnce(pmcal::Error) -> Self + 'a {
        move |source| CliError::Stage {
            stage,
            target: target.to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
