//! Flat `key = value` files with `[section]` headers.
//!
//! `#` and `;` start comment lines. Keys before the first header live in the
//! unnamed section `""`. Duplicate keys within a section are an error.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

/// Read-only view of one section, used to pull typed values with locations.
#[derive(Clone, Copy, Debug)]
pub struct Section<'a> {
    name: &'a str,
    entries: Option<&'a BTreeMap<String, Entry>>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::new();
        let mut current = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let indent = raw.len() - raw.trim_start().len();
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') || body.starts_with(';') {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(Error::parse(line, indent + body.len(), "missing `]`"));
                };
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::parse(line, indent + 2, "empty section name"));
                }
                current = name.to_string();
                kv.sections.entry(current.clone()).or_default();
                continue;
            }
            let Some(eq) = body.find('=') else {
                return Err(Error::parse(line, indent + 1, "expected `key = value`"));
            };
            let key = body[..eq].trim();
            if key.is_empty() {
                return Err(Error::parse(line, indent + 1, "empty key"));
            }
            let after = &body[eq + 1..];
            let value = after.trim();
            let column = indent + eq + 2 + (after.len() - after.trim_start().len());
            let section = kv.sections.entry(current.clone()).or_default();
            if section.contains_key(key) {
                return Err(Error::parse(line, indent + 1, format!("duplicate key `{key}`")));
            }
            section.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                    column,
                },
            );
        }
        Ok(kv)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Inserts or replaces a value (used for command-line overrides).
    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections.entry(section.to_string()).or_default().insert(
            key.to_string(),
            Entry {
                value: value.into(),
                line: 0,
                column: 0,
            },
        );
    }

    pub fn section<'a>(&'a self, name: &'a str) -> Section<'a> {
        Section {
            name,
            entries: self.sections.get(name),
        }
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|m| m.get(key))
            .map(|e| e.value.as_str())
    }

    /// Sorted `section -> key -> value` map, for echoing into reports.
    pub fn to_map(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.sections
            .iter()
            .map(|(s, m)| {
                (
                    s.clone(),
                    m.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect(),
                )
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            if !name.is_empty() {
                out.push_str(&format!("[{name}]\n"));
            }
            for (k, e) in entries {
                out.push_str(&format!("{k} = {}\n", e.value));
            }
        }
        out
    }
}

impl<'a> Section<'a> {
    pub fn name(&self) -> &str {
        self.name
    }

    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.entries
            .and_then(|m| m.get(key))
            .map(|e| e.value.as_str())
    }

    pub fn keys(&self) -> Vec<&'a str> {
        self.entries
            .map(|m| m.keys().map(|k| k.as_str()).collect())
            .unwrap_or_default()
    }

    fn qualified(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn located_error(&self, key: &str, message: String) -> Error {
        match self.entries.and_then(|m| m.get(key)) {
            Some(e) if e.line > 0 => Error::parse(e.line, e.column, message),
            _ => Error::arg(message),
        }
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                self.located_error(
                    key,
                    format!("invalid value `{v}` for `{}`", self.qualified(key)),
                )
            }),
        }
    }

    pub fn missing(&self, key: &str) -> Error {
        Error::arg(format!("missing key `{}`", self.qualified(key)))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn require_str(&self, key: &str) -> Result<&'a str> {
        self.get(key).ok_or_else(|| self.missing(key))
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn parse_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(self.located_error(
                key,
                format!("invalid boolean `{v}` for `{}`", self.qualified(key)),
            )),
        }
    }

    /// Comma-separated list.
    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|_| {
                    self.located_error(
                        key,
                        format!("invalid list item `{s}` in `{}`", self.qualified(key)),
                    )
                })
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Error for an unrecognized value, located at the key.
    pub fn bad_value(&self, key: &str, message: impl Into<String>) -> Error {
        self.located_error(key, message.into())
    }
}
