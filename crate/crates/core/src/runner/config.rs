//! Run configuration: TOML (`[params]`, `[grid]`, `[sweep]`, `[map]`,
//! `[output]`) or the equivalent JSON object.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{linspace, logspace};
use crate::params::{SystemParams, PARAM_NAMES};
use crate::runner::quantities::Quantity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.min, self.max, self.count),
            Spacing::Log => logspace(self.min, self.max, self.count),
        }
    }

    fn check(&self, section: &str) -> std::result::Result<(), (String, String)> {
        let fail = |key: &str, msg: String| Err((key.to_string(), format!("[{section}] {msg}")));
        if self.count < 2 {
            return fail("count", format!("count = {} but at least 2 points are required", self.count));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return fail("max", format!("need finite min < max, got [{}, {}]", self.min, self.max));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return fail("spacing", "log spacing needs min > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Second axis of a stability map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl MapSpec {
    pub fn axis(&self) -> GridSpec {
        GridSpec { min: self.min, max: self.max, count: self.count, spacing: self.spacing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub quantities: Vec<String>,
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub prefix: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { quantities: Vec::new(), dir: default_dir(), prefix: String::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "yes")]
    pub rwa: bool,
    #[serde(default = "one")]
    pub sideband_order: usize,
    pub params: SystemParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Toml,
    Json,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json {
            Self::from_json(&src)
        } else {
            Self::from_toml(&src)
        }
    }

    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of_offset(src, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.checked(src, Format::Toml)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(src).map_err(|e| Error::Config { line: Some(e.line()), message: e.to_string() })?;
        cfg.checked(src, Format::Json)
    }

    pub fn quantities(&self) -> Vec<Quantity> {
        self.output.quantities.iter().filter_map(|q| Quantity::parse(q)).collect()
    }

    fn checked(self, src: &str, fmt: Format) -> Result<Self> {
        self.validate()
            .map_err(|(section, key, message)| Error::Config { line: locate(src, fmt, section, &key), message })?;
        Ok(self)
    }

    /// Invariant checks; errors carry `(section, key, message)` so the
    /// caller can point at the offending line.
    fn validate(&self) -> std::result::Result<(), (&'static str, String, String)> {
        if let Err(e) = self.params.validate() {
            let key = match &e {
                Error::InvalidParam { name, .. } => name.to_string(),
                _ => String::new(),
            };
            return Err(("params", key, format!("[params] {e}")));
        }
        if let Some(g) = &self.grid {
            g.check("grid").map_err(|(k, m)| ("grid", k, m))?;
        }
        if let Some(m) = &self.map {
            if !PARAM_NAMES.contains(&m.parameter.as_str()) {
                return Err(("map", "parameter".into(), unknown_param("map", &m.parameter)));
            }
            m.axis().check("map").map_err(|(k, msg)| ("map", k, msg))?;
        }
        if let Some(s) = &self.sweep {
            if !PARAM_NAMES.contains(&s.parameter.as_str()) {
                return Err(("sweep", "parameter".into(), unknown_param("sweep", &s.parameter)));
            }
            if s.values.is_empty() {
                return Err(("sweep", "values".into(), "[sweep] values must not be empty".into()));
            }
            for &v in &s.values {
                let mut p = self.params.clone();
                p.set(&s.parameter, v).expect("name checked above");
                if let Err(e) = p.validate() {
                    return Err(("sweep", "values".into(), format!("[sweep] {} = {v}: {e}", s.parameter)));
                }
            }
        }
        if self.sideband_order < 1 {
            return Err(("", "sideband_order".into(), "sideband_order must be at least 1".into()));
        }
        let mut spectral = false;
        for q in &self.output.quantities {
            match Quantity::parse(q) {
                Some(q) => spectral |= q.is_spectral(),
                None => {
                    let known: Vec<&str> = Quantity::ALL.iter().map(|q| q.name()).collect();
                    return Err((
                        "output",
                        "quantities".into(),
                        format!("[output] unknown quantity `{q}`; known quantities: {}", known.join(", ")),
                    ));
                }
            }
        }
        if spectral && self.grid.is_none() {
            return Err(("output", "quantities".into(), "[output] spectral quantities need a [grid] section".into()));
        }
        Ok(())
    }
}

fn unknown_param(section: &str, name: &str) -> String {
    format!("[{section}] `{name}` is not a parameter; expected one of {}", PARAM_NAMES.join(", "))
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Best-effort 1-based line of `key` inside `section` (TOML) or of the
/// first `"key"` after `"section"` (JSON).
fn locate(src: &str, fmt: Format, section: &str, key: &str) -> Option<usize> {
    match fmt {
        Format::Toml => {
            let mut current = "";
            let mut section_line = None;
            for (i, raw) in src.lines().enumerate() {
                let line = raw.trim();
                if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                    current = name.trim();
                    if current == section {
                        section_line = Some(i + 1);
                    }
                    continue;
                }
                let k = line.split('=').next().unwrap_or("").trim();
                if current == section && !key.is_empty() && k == key {
                    return Some(i + 1);
                }
            }
            section_line
        }
        Format::Json => {
            let start = if section.is_empty() { 0 } else { src.find(&format!("\"{section}\""))? };
            let off = if key.is_empty() { start } else { start + src[start..].find(&format!("\"{key}\""))? };
            Some(line_of_offset(src, off))
        }
    }
}
