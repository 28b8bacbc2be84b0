//! Plain-text `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Each consumer takes
//! the keys it understands out of a [`KvMap`]; whatever remains afterwards is
//! reported as unknown.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate key `{0}`")]
    Duplicate(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown keys: {0}")]
    Unknown(String),
}

impl ConfigError {
    pub fn invalid(key: &str, message: impl Display) -> Self {
        ConfigError::Invalid { key: key.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvMap {
    entries: BTreeMap<String, String>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, message: "expected key=value".into() })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, message: "empty key".into() });
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate(key.to_string()));
            }
        }
        Ok(Self { entries })
    }

    pub fn insert(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Parses and removes `key`, leaving `target` untouched when absent.
    pub fn take_parsed<T>(&mut self, key: &str, target: &mut T) -> Result<(), ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(raw) = self.take(key) {
            *target = raw.parse().map_err(|e| ConfigError::invalid(key, e))?;
        }
        Ok(())
    }

    /// Comma-separated list; surrounding whitespace per item is ignored.
    pub fn take_list<T>(&mut self, key: &str, target: &mut Vec<T>) -> Result<(), ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some(raw) = self.take(key) {
            *target = raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| ConfigError::invalid(key, e)))
                .collect::<Result<_, _>>()?;
        }
        Ok(())
    }

    pub fn ensure_empty(&self) -> Result<(), ConfigError> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Unknown(self.entries.keys().cloned().collect::<Vec<_>>().join(", ")))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Sorted `key=value` lines.
    pub fn to_text(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
