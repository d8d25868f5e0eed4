//! Flat `key = value` configuration files.
//!
//! Keys carry dotted section prefixes (`cleanse.beta = 2.5`). `#` starts a
//! comment, blank lines are ignored and a key may appear only once. Every key
//! must be consumed by the command reading the file: leftovers are reported
//! as unknown, which catches typos that would otherwise silently fall back to
//! a default.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
    base: PathBuf,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str, base: impl Into<PathBuf>) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config(format!("line {line}: expected 'key = value'")));
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Config(format!("line {line}: invalid key '{key}'")));
            }
            if let Some((first, _)) = entries.insert(key.to_string(), (line, value.trim().to_string())) {
                return Err(CliError::Config(format!(
                    "line {line}: key '{key}' already set on line {first}"
                )));
            }
        }
        Ok(Config {
            entries,
            base: base.into(),
            used: RefCell::default(),
        })
    }

    /// Reads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::parse(&text, base)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let (_, v) = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    pub fn get<V>(&self, key: &str) -> CliResult<Option<V>>
    where
        V: FromStr,
        V::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Config(format!("{key}: cannot parse '{v}': {e}")))
            })
            .transpose()
    }

    pub fn get_or<V>(&self, key: &str, default: V) -> CliResult<V>
    where
        V: FromStr,
        V::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<V>(&self, key: &str) -> CliResult<V>
    where
        V: FromStr,
        V::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    /// Comma-separated list; an absent key is an empty list.
    pub fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(|v| self.resolve(v))
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Distinct names `n` for which some key starts with `prefix.n.`, sorted.
    pub fn sections(&self, prefix: &str) -> Vec<String> {
        let head = format!("{prefix}.");
        let names: BTreeSet<String> = self
            .entries
            .keys()
            .filter_map(|k| k.strip_prefix(&head))
            .filter_map(|rest| rest.split_once('.').map(|(n, _)| n.to_string()))
            .collect();
        names.into_iter().collect()
    }

    /// Fails on the first key nothing has read.
    pub fn ensure_consumed(&self) -> CliResult<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((k, (line, _))) => Err(CliError::Config(format!("line {line}: unknown key '{k}'"))),
            None => Ok(()),
        }
    }
}
