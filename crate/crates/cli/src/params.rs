//! Parameter resolution: command-line flag, then config file, then default.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    Config(usize),
}

#[derive(Debug, Default)]
pub struct Params {
    flags: BTreeMap<String, String>,
    config: Config,
    /// Directory that relative paths from the config file resolve against.
    base: Option<PathBuf>,
    read: RefCell<BTreeSet<String>>,
}

impl Params {
    pub fn new(flags: BTreeMap<String, String>, config: Config, base: Option<PathBuf>) -> Self {
        Self {
            flags,
            config,
            base,
            read: RefCell::new(BTreeSet::new()),
        }
    }

    fn raw(&self, key: &str) -> Option<(&str, Source)> {
        self.read.borrow_mut().insert(key.to_string());
        if let Some(v) = self.flags.get(key) {
            return Some((v.as_str(), Source::Flag));
        }
        self.config
            .get(key)
            .map(|v| (v, Source::Config(self.config.line_of(key).unwrap_or(0))))
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.raw(key).map(|(_, s)| s)
    }

    fn describe(key: &str, source: Source) -> String {
        match source {
            Source::Flag => format!("flag `{key}`"),
            Source::Config(line) => format!("config key `{key}` (line {line})"),
        }
    }

    fn parse_one<T: FromStr>(key: &str, raw: &str, source: Source) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        raw.parse::<T>()
            .map_err(|e| CliError::Input(format!("{}: cannot parse {raw:?}: {e}", Self::describe(key, source))))
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key).map(|(raw, src)| Self::parse_one(key, raw, src)).transpose()
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| v.to_string())
    }

    /// A path; config-file values are relative to the config file's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let (raw, src) = self.raw(key)?;
        Some(self.resolve(raw, src))
    }

    /// Comma-separated paths, resolved like [`Params::path`].
    pub fn paths(&self, key: &str) -> Option<Vec<PathBuf>> {
        let (raw, src) = self.raw(key)?;
        Some(raw.split(',').map(|p| self.resolve(p.trim(), src)).collect())
    }

    fn resolve(&self, raw: &str, src: Source) -> PathBuf {
        let p = PathBuf::from(raw);
        match (&self.base, src) {
            (Some(base), Source::Config(_)) if p.is_relative() => base.join(p),
            _ => p,
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: Display,
    {
        let Some((raw, src)) = self.raw(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|item| Self::parse_one(key, item.trim(), src))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    /// A list, or a `start:end[:step]` inclusive range of integers.
    pub fn counts(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        let Some((raw, src)) = self.raw(key) else {
            return Ok(None);
        };
        if raw.contains(':') {
            let parts = raw
                .split(':')
                .map(|p| Self::parse_one::<usize>(key, p.trim(), src))
                .collect::<Result<Vec<_>, _>>()?;
            let (start, end, step) = match parts[..] {
                [a, b] => (a, b, 1),
                [a, b, c] => (a, b, c),
                _ => return Err(CliError::Input(format!("{}: expected start:end[:step]", Self::describe(key, src)))),
            };
            if step == 0 || start > end {
                return Err(CliError::Input(format!("{}: empty range {raw:?}", Self::describe(key, src))));
            }
            return Ok(Some((start..=end).step_by(step).collect()));
        }
        self.list(key)
    }

    /// Rejects keys that were supplied but never read by the command.
    pub fn finish(&self) -> Result<(), CliError> {
        let read = self.read.borrow();
        let unknown: Vec<String> = self
            .flags
            .keys()
            .map(|k| (k.as_str(), Source::Flag))
            .chain(self.config.keys().map(|k| (k, Source::Config(self.config.line_of(k).unwrap_or(0)))))
            .filter(|(k, _)| !read.contains(*k))
            .map(|(k, s)| Self::describe(k, s))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Input(format!("unknown parameter(s) for this command: {}", unknown.join(", "))))
        }
    }
}
