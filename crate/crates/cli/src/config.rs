//! Flat `key = value` configuration files and flag/config merging.
//!
//! Every key names a command-line flag (without the leading dashes). A flag
//! given on the command line wins over the file. Keys the command never
//! asks for are rejected so typos do not go unnoticed.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key = value` lines; blank lines and `#` comments are ignored.
    /// Underscores in keys are read as dashes.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected `key = value`", i + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Usage(format!("config key `{key}` given twice")));
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Core(densray_core::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })?;
        Self::parse(&text)
    }
}

/// Looks up settings flag-first, then config, recording every key asked for.
pub struct Resolver {
    config: Config,
    asked: RefCell<BTreeSet<String>>,
}

impl Resolver {
    pub fn new(config: Config) -> Self {
        Resolver {
            config,
            asked: RefCell::new(BTreeSet::new()),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.asked.borrow_mut().insert(key.to_string());
        self.config.values.get(key).map(String::as_str)
    }

    pub fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let from_config = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_config
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    pub fn req<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing --{key} (flag or config key)")))
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    /// A boolean switch: set by the flag or by `key = true` in the config.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        let from_config = self.opt::<bool>(None, key)?.unwrap_or(false);
        Ok(flag || from_config)
    }

    /// A repeatable flag; the config value is a comma-separated list.
    pub fn list(&self, flag: Vec<String>, key: &str) -> Result<Vec<String>, CliError> {
        let from_config = self.raw(key);
        if !flag.is_empty() {
            return Ok(flag);
        }
        Ok(from_config
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default())
    }

    /// Fails on config keys the command never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let asked = self.asked.borrow();
        let unknown: Vec<&String> = self
            .config
            .values
            .keys()
            .filter(|k| !asked.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "unknown config key(s) for this command: {}",
                unknown
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }
}
