//! Run configuration: a TOML file plus `--set key=value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use kdvist::hankel::{HankelOptions, Route};
use kdvist::oracle::OracleConfig;
use kdvist::potential::{Catalog, Potential};
use kdvist::scattering::ScatterOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A configuration problem (exit code 2), as opposed to a failed computation.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Either an explicit list or `count` evenly spaced points on `[start, stop]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub x: Axis,
    pub t: Axis,
    /// Points in `s` for the `rho` command.
    pub s: Axis,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x: Axis::Range { start: -10.0, stop: 10.0, count: 41 },
            t: Axis::List(vec![0.0, 0.5, 1.0]),
            s: Axis::Range { start: 0.01, stop: 0.99, count: 99 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub unitarity: f64,
    pub split: f64,
    /// Oracle comparison on the right window.
    pub oracle: f64,
    pub atom_position: f64,
    pub total_mass: f64,
    pub soliton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { unitarity: 1e-6, split: 1e-7, oracle: 5e-3, atom_position: 1e-6, total_mass: 1e-5, soliton: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub solver: OracleConfig,
    /// Width of the smoothed front used in place of a step.
    pub mollifier: f64,
    /// Comparison window `[lo, hi]` for step-like data.
    pub window: [f64; 2],
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            solver: OracleConfig { domain_half_length: 256.0, modes: 32768, wrap_tol: 1e-3, ..Default::default() },
            mollifier: 0.1,
            window: [2.0, 10.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Break the Fourier sign on purpose; the split identity and the soliton round trip must fail.
    pub negative_control: bool,
    /// Run the oracle window comparison (the slowest check).
    pub oracle: bool,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { negative_control: false, oracle: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Compact catalog form such as `box(1, 1)`, or a table with `tag` and parameters, or a
    /// table with `file` naming a potential file.
    pub potential: toml::Value,
    /// Previously written scattering data to reuse instead of scattering again.
    pub scattering_file: Option<PathBuf>,
    pub output: PathBuf,
    pub route: Route,
    pub grid: Grid,
    pub scatter: ScatterOptions,
    pub hankel: HankelOptions,
    pub tolerances: Tolerances,
    pub oracle: OracleSection,
    pub validate: ValidateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: toml::Value::String("zero".into()),
            scattering_file: None,
            output: PathBuf::from("out"),
            route: Route::Trace,
            grid: Grid::default(),
            scatter: ScatterOptions::default(),
            hankel: HankelOptions::default(),
            tolerances: Tolerances::default(),
            oracle: OracleSection::default(),
            validate: ValidateSection::default(),
        }
    }
}

/// Applies `key.path=value`; the value is read as a TOML literal when possible, else a string.
fn apply_override(root: &mut toml::Table, item: &str) -> anyhow::Result<()> {
    let (key, raw) = item.split_once('=').ok_or_else(|| config_error(format!("override `{item}` is not key=value")))?;
    let value = parse_literal(raw.trim());
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_error(format!("bad override key `{key}`")));
    }
    let mut table = root;
    for part in &path[..path.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| config_error(format!("`{part}` in `{key}` is not a table")))?;
    }
    table.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    /// Reads the file (if any), applies the overrides and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| config_error(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_error(e.to_string()))?;
        cfg.check().map_err(|e| config_error(e.to_string()))?;
        Ok(cfg)
    }

    fn check(&self) -> anyhow::Result<()> {
        self.hankel.validate()?;
        self.oracle.solver.validate()?;
        for (name, v) in [
            ("tolerances.unitarity", self.tolerances.unitarity),
            ("tolerances.split", self.tolerances.split),
            ("tolerances.oracle", self.tolerances.oracle),
            ("tolerances.atom_position", self.tolerances.atom_position),
            ("tolerances.total_mass", self.tolerances.total_mass),
            ("tolerances.soliton", self.tolerances.soliton),
            ("oracle.mollifier", self.oracle.mollifier),
            ("scatter.grid.k_max", self.scatter.grid.k_max),
            ("scatter.grid.dk", self.scatter.grid.dk),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("`{name}` must be positive and finite");
            }
        }
        let (xs, ts) = (self.grid.x.values(), self.grid.t.values());
        if xs.is_empty() || ts.is_empty() {
            bail!("grid.x and grid.t must be non-empty");
        }
        if xs.iter().chain(&ts).any(|v| !v.is_finite()) {
            bail!("grid values must be finite");
        }
        if ts.iter().any(|&t| t < 0.0) {
            bail!("grid.t values must be non-negative");
        }
        self.potential_spec()?;
        Ok(())
    }

    fn potential_spec(&self) -> anyhow::Result<Option<Catalog>> {
        match &self.potential {
            toml::Value::String(s) => Ok(Some(Catalog::parse(s)?)),
            toml::Value::Table(t) if t.contains_key("file") => Ok(None),
            v @ toml::Value::Table(_) => Ok(Some(Catalog::from_toml(v)?)),
            _ => bail!("`potential` must be a string or a table"),
        }
    }

    pub fn build_potential(&self) -> anyhow::Result<Potential> {
        match self.potential_spec().map_err(|e| config_error(e.to_string()))? {
            Some(c) => Potential::from_catalog(&c).map_err(|e| config_error(e.to_string())),
            None => {
                let file = self.potential.get("file").and_then(|v| v.as_str()).ok_or_else(|| config_error("`potential.file` must be a path"))?;
                Potential::read(Path::new(file)).with_context(|| format!("reading potential file {file}"))
            }
        }
    }

    /// Canonical TOML text of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
