//! Flat key-value configuration documents with `[section]` headers.
//!
//! Shared grammar for run configs and synthetic-truth specs:
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Keys may repeat within a section (consumers that expect a single value
//! reject repeats themselves). Unknown keys are rejected by consumers, not by
//! the parser.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}` in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {msg}")]
    BadValue {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("missing required key `{key}` in section [{section}]")]
    MissingKey { section: String, key: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

/// A parsed configuration document: ordered sections of ordered entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Document, ConfigError> {
        let mut doc = Document::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: line_no,
                    msg: "section header missing closing `]`".into(),
                })?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(ConfigError::Syntax {
                        line: line_no,
                        msg: "empty section name".into(),
                    });
                }
                if doc.sections.iter().any(|s| s.name == name) {
                    return Err(ConfigError::Syntax {
                        line: line_no,
                        msg: format!("section [{name}] declared twice"),
                    });
                }
                doc.sections.push(Section {
                    name: name.to_string(),
                    line: line_no,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                msg: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: "empty key".into(),
                });
            }
            let section = doc.sections.last_mut().ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                msg: "key-value entry before any [section] header".into(),
            })?;
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line: line_no,
            });
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

impl Section {
    /// The unique value for `key`, if present; errors when repeated.
    pub fn get(&self, key: &str) -> Result<Option<&Entry>, ConfigError> {
        let mut found = None;
        for e in &self.entries {
            if e.key == key {
                if found.is_some() {
                    return Err(ConfigError::DuplicateKey {
                        line: e.line,
                        key: key.to_string(),
                    });
                }
                found = Some(e);
            }
        }
        Ok(found)
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> {
        self.entries.iter().filter(move |e| e.key == key)
    }
}

impl Entry {
    pub fn as_f64(&self) -> Result<f64, ConfigError> {
        self.value.parse::<f64>().map_err(|_| ConfigError::BadValue {
            line: self.line,
            key: self.key.clone(),
            msg: format!("`{}` is not a number", self.value),
        })
    }

    pub fn as_u64(&self) -> Result<u64, ConfigError> {
        self.value.parse::<u64>().map_err(|_| ConfigError::BadValue {
            line: self.line,
            key: self.key.clone(),
            msg: format!("`{}` is not a non-negative integer", self.value),
        })
    }

    pub fn as_usize(&self) -> Result<usize, ConfigError> {
        Ok(self.as_u64()? as usize)
    }

    pub fn as_bool(&self) -> Result<bool, ConfigError> {
        match self.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(ConfigError::BadValue {
                line: self.line,
                key: self.key.clone(),
                msg: format!("`{other}` is not a boolean"),
            }),
        }
    }

    /// Comma-separated list of floats.
    pub fn as_f64_list(&self) -> Result<Vec<f64>, ConfigError> {
        self.value
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| ConfigError::BadValue {
                    line: self.line,
                    key: self.key.clone(),
                    msg: format!("`{}` is not a number", s.trim()),
                })
            })
            .collect()
    }

    /// Comma-separated list of non-empty strings.
    pub fn as_str_list(&self) -> Result<Vec<String>, ConfigError> {
        let items: Vec<String> = self
            .value
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if items.is_empty() {
            return Err(ConfigError::BadValue {
                line: self.line,
                key: self.key.clone(),
                msg: "empty list".into(),
            });
        }
        Ok(items)
    }

    /// Two comma-separated floats as an interval.
    pub fn as_interval(&self) -> Result<(f64, f64), ConfigError> {
        let xs = self.as_f64_list()?;
        if xs.len() != 2 {
            return Err(ConfigError::BadValue {
                line: self.line,
                key: self.key.clone(),
                msg: "expected `lower, upper`".into(),
            });
        }
        Ok((xs[0], xs[1]))
    }
}
