//! Flat key-value configuration files.
//!
//! The format is intentionally plain: one `key = value` pair per line with
//! dotted section keys (`domain.kind = ball`), `#` comments, and blank lines.
//! Command-line flags always take precedence over file values.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value for '{key}': {reason}")]
    InvalidValue { key: String, reason: String },
}

/// Parsed configuration map.
#[derive(Clone, Debug, Default)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Malformed {
                line,
                text: trimmed.to_string(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Malformed { line, text: trimmed.to_string() });
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(ConfigError::DuplicateKey { line, key });
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                reason: format!("cannot parse '{v}'"),
            }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Comma-separated float list (`"0,0"` → `[0.0, 0.0]`).
pub fn parse_point(s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| ConfigError::InvalidValue {
                key: "point".into(),
                reason: format!("cannot parse component '{p}'"),
            })
        })
        .collect()
}

/// Comma-separated usize list (`"32,64,128"`).
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, ConfigError> {
    s.split(',')
        .map(|p| {
            p.trim().parse::<usize>().map_err(|_| ConfigError::InvalidValue {
                key: "list".into(),
                reason: format!("cannot parse component '{p}'"),
            })
        })
        .collect()
}
