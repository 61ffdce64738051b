//! Experiment configuration: a flat key=value file plus command-line
//! overrides. Every run is fully determined by the config and the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

/// Which data the suites run on.
pub const GENERATORS: &[&str] = &["polynomial", "smooth-trig", "file"];

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    /// Ambient dimension (2 = circle, 3 = sphere).
    pub m: usize,
    /// Lipschitz order k of the data collections {f^(j) : |j| <= k}.
    pub k: usize,
    /// Hoelder exponent in (0, 1).
    pub alpha: f64,
    pub surface: String,
    pub radius: f64,
    /// Mesh refinement levels, strictly increasing.
    pub levels: Vec<usize>,
    pub generator: String,
    /// Node-value data file (generator = file).
    pub data: Option<PathBuf>,
    /// Mesh file accompanying `data`; must match the configured levels.
    pub mesh: Option<PathBuf>,
    pub seed: u64,
    /// Per-record tolerance overrides, keyed by record name.
    pub tolerances: BTreeMap<String, f64>,
    /// JSON report destination ("-" or unset: stdout table only).
    pub out: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            m: 3,
            k: 1,
            alpha: 0.5,
            surface: "sphere".to_string(),
            radius: 1.0,
            levels: vec![4, 8],
            generator: "polynomial".to_string(),
            data: None,
            mesh: None,
            seed: 42,
            tolerances: BTreeMap::new(),
            out: None,
        }
    }
}

/// A malformed key, value, or combination; maps to the usage exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl Config {
    /// Apply one key=value setting (from a file line or a CLI flag).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "m" => self.m = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "surface" => self.surface = value.to_string(),
            "radius" => self.radius = parse(key, value)?,
            "levels" => {
                self.levels = value
                    .split(',')
                    .map(|part| parse("levels", part.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "generator" => self.generator = value.to_string(),
            "data" => self.data = Some(PathBuf::from(value)),
            "mesh" => self.mesh = Some(PathBuf::from(value)),
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => {
                if let Some(name) = key.strip_prefix("tol.") {
                    self.tolerances.insert(name.to_string(), parse(key, value)?);
                } else {
                    return Err(bad(format!("unknown key `{key}`")));
                }
            }
        }
        Ok(())
    }

    /// Apply a whole key=value file (# comments and blank lines ignored).
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=3).contains(&self.m) {
            return Err(bad(format!("m = {} out of range (2 or 3)", self.m)));
        }
        if self.k > 3 {
            return Err(bad(format!("k = {} out of range (0..=3)", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        if self.surface != "sphere" && self.surface != "circle" {
            return Err(bad(format!("unknown surface `{}`", self.surface)));
        }
        if self.surface == "circle" && self.m != 2 {
            return Err(bad("surface `circle` requires m = 2"));
        }
        if self.radius <= 0.0 {
            return Err(bad("radius must be positive"));
        }
        if self.levels.is_empty() {
            return Err(bad("at least one refinement level required"));
        }
        if !self.levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad("levels must be strictly increasing"));
        }
        if !GENERATORS.contains(&self.generator.as_str()) {
            return Err(bad(format!("unknown generator `{}`", self.generator)));
        }
        if self.generator == "file" && (self.data.is_none() || self.mesh.is_none()) {
            return Err(bad("generator `file` requires data= and mesh="));
        }
        Ok(())
    }

    /// Record tolerance, with the built-in default unless overridden.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Canonical key=value rendering (round-trips through `apply_file`).
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "surface = {}", self.surface);
        let _ = writeln!(s, "radius = {}", self.radius);
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        let _ = writeln!(s, "levels = {}", levels.join(","));
        let _ = writeln!(s, "generator = {}", self.generator);
        let _ = writeln!(s, "seed = {}", self.seed);
        for (name, tol) in &self.tolerances {
            let _ = writeln!(s, "tol.{name} = {tol:e}");
        }
        s
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| bad(format!("cannot parse `{value}` for key `{key}`")))
}
