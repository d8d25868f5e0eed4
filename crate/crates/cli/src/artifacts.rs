//! In-memory artifact sets, written to disk in one step.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Files keyed by path relative to an output directory, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Artifacts {
    files: Vec<(PathBuf, String)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.files.push((path.into(), contents));
    }

    pub fn extend(&mut self, dir: &str, other: Artifacts) {
        for (p, c) in other.files {
            self.files.push((Path::new(dir).join(p), c));
        }
    }

    pub fn files(&self) -> &[(PathBuf, String)] {
        &self.files
    }

    pub fn get(&self, path: impl AsRef<Path>) -> Option<&str> {
        let path = path.as_ref();
        self.files.iter().find(|(p, _)| p == path).map(|(_, c)| c.as_str())
    }

    /// Writes every file under `out`. If any write fails, the files and
    /// directories created so far are removed again before the error is
    /// returned.
    pub fn write_to(&self, out: &Path) -> CliResult<Vec<PathBuf>> {
        let mut created_dirs = Vec::new();
        let mut written = Vec::new();
        let result = self.write_inner(out, &mut created_dirs, &mut written);
        if result.is_err() {
            for f in &written {
                let _ = fs::remove_file(f);
            }
            for d in created_dirs.iter().rev() {
                let _ = fs::remove_dir(d);
            }
        }
        result.map(|()| written)
    }

    fn write_inner(&self, out: &Path, dirs: &mut Vec<PathBuf>, written: &mut Vec<PathBuf>) -> CliResult<()> {
        for (rel, contents) in &self.files {
            let path = out.join(rel);
            if let Some(parent) = path.parent() {
                let mut missing: Vec<PathBuf> = parent
                    .ancestors()
                    .take_while(|a| !a.as_os_str().is_empty() && !a.exists())
                    .map(Path::to_path_buf)
                    .collect();
                missing.reverse();
                for d in missing {
                    fs::create_dir(&d).map_err(|e| CliError::io(&d, e))?;
                    dirs.push(d);
                }
            }
            fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(())
    }
}
