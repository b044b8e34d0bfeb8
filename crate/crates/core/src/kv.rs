//! Flat `key = value` text files with optional `[section]` headers.
//!
//! Used by the calendar, scenario and run-configuration files. Keys may
//! repeat; `#` starts a comment.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    pub origin: String,
    pub entries: Vec<Entry>,
}

impl KvFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut section = String::new();
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    Error::format(format!("{origin}:{line_no}"), "unterminated section header")
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::format(format!("{origin}:{line_no}"), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::format(format!("{origin}:{line_no}"), "empty key"));
            }
            entries.push(Entry {
                section: section.clone(),
                key: key.to_string(),
                value: value.trim().to_string(),
                line: line_no,
            });
        }
        Ok(Self {
            origin: origin.to_string(),
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Last value for `key`, searching every section when `section` is `None`.
    pub fn get(&self, section: Option<&str>, key: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.key == key && section.is_none_or(|s| e.section == s))
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    pub fn location(&self, entry: &Entry) -> String {
        format!("{}:{}", self.origin, entry.line)
    }

    pub fn parse_value<T: std::str::FromStr>(&self, entry: &Entry) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        entry
            .value
            .parse::<T>()
            .map_err(|e| Error::format(self.location(entry), format!("bad value for `{}`: {e}", entry.key)))
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, section: Option<&str>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key).map(|e| self.parse_value(e)).transpose()
    }

    /// Comma-separated list of floats.
    pub fn get_list(&self, section: Option<&str>, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(entry) = self.get(section, key) else {
            return Ok(None);
        };
        entry
            .value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::format(self.location(entry), format!("bad number `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}
