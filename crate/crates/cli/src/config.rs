//! `key = value` files with `[section]` headers.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    /// Keys are `section.key`; keys before any header have no prefix.
    values: BTreeMap<String, String>,
    source: String,
}

impl Ini {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let bad = |message: &str| CliError::Validation(format!("{source}:{}: {message}", index + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| bad("unterminated section header"))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(bad("empty key"));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if values.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(bad(&format!("`{full}` set twice")));
            }
        }
        Ok(Ini {
            values,
            source: source.to_string(),
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Validation(format!("{}: `{key}`: {e}", self.source)))
            })
            .transpose()
    }

    /// Comma-separated list under `key`.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| parse_list(v).map_err(|e| CliError::Validation(format!("{}: `{key}`: {e}", self.source))))
            .transpose()
    }
}

/// Reads the `--config` file, or an empty config.
pub fn load(path: Option<&std::path::Path>) -> Result<Ini, CliError> {
    match path {
        None => Ok(Ini::default()),
        Some(p) => Ini::parse(&crate::files::read(p)?, &p.display().to_string()),
    }
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}
