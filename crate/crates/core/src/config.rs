//! Plain-text configuration: one `key = value` per line, `#` starts a comment.
//!
//! The format is small enough that a dedicated parser crate buys nothing, and
//! owning it keeps error messages pinned to line numbers.

use std::fmt::{self, Display};

use crate::error::{Error, Result};
use crate::model::{AtomicConfig, ModelParams, Vec3};
use crate::nogo::MultiLevelModel;
use crate::phasemap::fmt_f64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based source line; 0 for values injected by overrides.
    pub line: usize,
}

/// An ordered list of unique keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    entries: Vec<Entry>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty key".into(),
                });
            }
            if let Some(prev) = doc.find(key) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
            doc.entries.push(Entry {
                key: key.to_string(),
                value: v.trim().to_string(),
                line,
            });
        }
        Ok(doc)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn find(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.find(key).is_some()
    }

    /// Replaces the value of `key`, appending it if absent.
    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => e.value = value.to_string(),
            None => self.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            }),
        }
    }

    /// Fails on the first key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(located(e, format!("unknown key `{}`", e.key))),
            None => Ok(()),
        }
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.find(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        parse_real(e, &e.value)
    }

    pub fn vec3(&self, key: &str) -> Result<Vec3> {
        let e = self.require(key)?;
        let v = self.list(key)?;
        v.try_into().map_err(|v: Vec<f64>| {
            located(e, format!("`{key}` needs 3 components, found {}", v.len()))
        })
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        let e = self.require(key)?;
        if e.value.is_empty() {
            return Ok(Vec::new());
        }
        e.value.split(',').map(|s| parse_real(e, s.trim())).collect()
    }
}

fn located(e: &Entry, msg: String) -> Error {
    if e.line == 0 {
        Error::Config(format!("override: {msg}"))
    } else {
        Error::Parse { line: e.line, msg }
    }
}

fn parse_real(e: &Entry, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| located(e, format!("`{}`: cannot parse `{s}` as a real number", e.key)))
}

/// Applies `key=value` overrides; the key must be one of `allowed`.
pub fn apply_overrides(doc: &mut Document, overrides: &[(String, String)], allowed: &[&str]) -> Result<()> {
    for (k, v) in overrides {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("override of unknown key `{k}`")));
        }
        doc.set(k, v);
    }
    Ok(())
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, found `{s}`")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Config(format!("empty key in `{s}`")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamSource {
    Abstract(ModelParams),
    Atomic(AtomicConfig),
}

const ATOMIC_ONLY: [&str; 5] = ["kappa", "eps1", "eps2", "d31", "d32"];

/// Atomic mode is chosen when any atomic-only key is present.
pub fn is_atomic(doc: &Document) -> bool {
    ATOMIC_ONLY.iter().any(|k| doc.contains(k))
}

pub fn read_params(doc: &Document) -> Result<ParamSource> {
    if is_atomic(doc) {
        doc.check_keys(&AtomicConfig::KEYS)?;
        Ok(ParamSource::Atomic(AtomicConfig {
            delta: doc.real("delta")?,
            big_delta: doc.real("big_delta")?,
            omega1: doc.real("omega1")?,
            omega2: doc.real("omega2")?,
            g1: doc.real("g1")?,
            g2: doc.real("g2")?,
            kappa: doc.real("kappa")?,
            eps1: doc.vec3("eps1")?,
            eps2: doc.vec3("eps2")?,
            d31: doc.vec3("d31")?,
            d32: doc.vec3("d32")?,
            allow_parallel: false,
        }))
    } else {
        doc.check_keys(&ModelParams::KEYS)?;
        let mut p = ModelParams {
            delta: 0.0,
            big_delta: 0.0,
            omega1: 0.0,
            omega2: 0.0,
            g1: 0.0,
            g2: 0.0,
            chi1: 0.0,
            chi2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa3: 0.0,
        };
        for key in ModelParams::KEYS {
            p.set(key, doc.real(key)?);
        }
        Ok(ParamSource::Abstract(p))
    }
}

pub const MULTILEVEL_KEYS: [&str; 4] = ["energies", "omega", "kappa", "g"];

pub fn read_multilevel(doc: &Document) -> Result<MultiLevelModel> {
    doc.check_keys(&MULTILEVEL_KEYS)?;
    MultiLevelModel::from_upper_triangle(
        doc.list("energies")?,
        &doc.list("g")?,
        doc.real("omega")?,
        doc.real("kappa")?,
    )
}

/// Structured-text output record: `key = value` per line, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Record {
    lines: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, fmt_f64(value))
    }

    pub fn reals(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let s: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        self.text(key, s.join(","))
    }

    pub fn params(&mut self, p: &ModelParams) -> &mut Self {
        for key in ModelParams::KEYS {
            self.real(key, p.get(key).unwrap());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
