//! Experiment configuration.
//!
//! Configs are TOML documents with an `experiment` key and the sections
//! `domain`, `operator`, `params` and `output`:
//!
//! ```toml
//! experiment = "exp_sqfn_equivalence"
//!
//! [domain]
//! vertices = [[1.0, 0.0], [-1.0, 0.0]]   # or: roots = 2
//! r = 0.6
//! s = 0.9
//!
//! [operator]
//! dimension = 4          # or: file = "t.txt"
//! p = 2.0
//! condition_cap = 1.0
//! seed = 7
//! instances = 20
//!
//! [params]
//! alpha = 0.5
//! beta = 1.0
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Every key has a per-experiment default, so an empty file is valid.
//! Dotted overrides such as `params.alpha=2` are applied after the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{is_e_large_enough, StolzDomain, UnimodularVertexSet};
use crate::C64;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "RITT_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "ritt-output";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// Vertices as `[re, im]` pairs, counterclockwise.
    #[serde(default = "default_vertices")]
    pub vertices: Vec<[f64; 2]>,
    /// Shorthand for the `N`-th roots of unity; replaces `vertices`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<usize>,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_s")]
    pub s: f64,
}

fn default_vertices() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}
fn default_r() -> f64 {
    0.6
}
fn default_s() -> f64 {
    0.9
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            vertices: default_vertices(),
            roots: None,
            r: default_r(),
            s: default_s(),
        }
    }
}

impl DomainSpec {
    pub fn roots(n: usize, r: f64, s: f64) -> Self {
        Self {
            vertices: default_vertices(),
            roots: Some(n),
            r,
            s,
        }
    }

    pub fn vertex_set(&self) -> Result<UnimodularVertexSet> {
        if let Some(n) = self.roots {
            if n == 0 {
                return Err(config_error("domain.roots", "must be at least 1"));
            }
            return Ok(UnimodularVertexSet::roots_of_unity(n));
        }
        if self.vertices.is_empty() {
            return Err(config_error("domain.vertices", "must contain at least one vertex"));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let modulus = v[0].hypot(v[1]);
            if (modulus - 1.0).abs() > 1e-12 {
                return Err(config_error(
                    &format!("domain.vertices[{i}]"),
                    &format!("|ξ| = {modulus} but vertices must lie on the unit circle"),
                ));
            }
        }
        UnimodularVertexSet::new(self.vertices.iter().map(|v| C64::new(v[0], v[1])).collect())
            .map_err(|e| config_error("domain.vertices", &e.to_string()))
    }

    pub fn inner(&self) -> Result<StolzDomain> {
        StolzDomain::new(self.vertex_set()?, self.r).map_err(|e| config_error("domain.r", &e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        let e = self.vertex_set()?;
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(config_error("domain.r", "must lie in (0, 1)"));
        }
        if !(self.s > self.r && self.s < 1.0) {
            return Err(config_error("domain.s", "must satisfy r < s < 1"));
        }
        if !is_e_large_enough(&e, self.r) {
            return Err(config_error(
                "domain.r",
                &format!("{} is not large enough for the vertex set (need ≥ {:.6})", self.r, e.min_large_enough_radius()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    /// Matrix file; when set the generator keys are ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Radius of the sampling region `E_{spectral_radius}`; defaults to `domain.r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_radius: Option<f64>,
    /// Fraction of eigenvalues placed near a vertex.
    #[serde(default = "default_vertex_mass")]
    pub vertex_mass: f64,
    /// Near-vertex eigenvalues sit at distance `10^{-u}`, `u` uniform in this range.
    #[serde(default = "default_vertex_exponents")]
    pub vertex_exponents: [f64; 2],
    /// Put one eigenvalue exactly on each vertex (dimension permitting).
    #[serde(default)]
    pub vertex_eigenvalues: bool,
    #[serde(default = "default_cap")]
    pub condition_cap: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: usize,
}

fn default_dimension() -> usize {
    4
}
fn default_p() -> f64 {
    2.0
}
fn default_vertex_mass() -> f64 {
    0.4
}
fn default_vertex_exponents() -> [f64; 2] {
    [0.5, 3.0]
}
fn default_cap() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    20240101
}
fn default_instances() -> usize {
    10
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self {
            file: None,
            dimension: default_dimension(),
            p: default_p(),
            spectral_radius: None,
            vertex_mass: default_vertex_mass(),
            vertex_exponents: default_vertex_exponents(),
            vertex_eigenvalues: false,
            condition_cap: default_cap(),
            seed: default_seed(),
            instances: default_instances(),
        }
    }
}

impl OperatorSpec {
    fn validate(&self, domain: &DomainSpec) -> Result<()> {
        if self.file.is_none() && self.dimension == 0 {
            return Err(config_error("operator.dimension", "must be at least 1"));
        }
        if !(self.p >= 1.0) {
            return Err(config_error("operator.p", "must be at least 1 (inf allowed)"));
        }
        if let Some(r) = self.spectral_radius {
            if !(r > 0.0 && r <= domain.r) {
                return Err(config_error("operator.spectral_radius", "must lie in (0, domain.r]"));
            }
        }
        if !(0.0..=1.0).contains(&self.vertex_mass) {
            return Err(config_error("operator.vertex_mass", "must lie in [0, 1]"));
        }
        let [lo, hi] = self.vertex_exponents;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(config_error("operator.vertex_exponents", "must be [lo, hi] with 0 < lo <= hi"));
        }
        if !(self.condition_cap >= 1.0 && self.condition_cap.is_finite()) {
            return Err(config_error("operator.condition_cap", "must be a finite number >= 1"));
        }
        if self.instances == 0 {
            return Err(config_error("operator.instances", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Artifact directory; defaults to `$RITT_OUTPUT_DIR` or `ritt-output`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl OutputSpec {
    pub fn resolve(&self) -> PathBuf {
        match &self.dir {
            Some(d) => PathBuf::from(d),
            None => std::env::var_os(OUTPUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub output: OutputSpec,
}

pub(crate) fn config_error(field: &str, message: &str) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.to_string(),
    }
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            domain: DomainSpec::default(),
            operator: OperatorSpec::default(),
            params: toml::Table::new(),
            output: OutputSpec::default(),
        }
    }

    /// Builds the config: `defaults`, then the file (if any), then the
    /// dotted `key=value` overrides; the result is validated.
    pub fn assemble(defaults: &ExperimentConfig, file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = toml::Table::try_from(defaults).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let user: toml::Table = text
                .parse()
                .map_err(|e: toml::de::Error| Error::Parse(format!("{}: {}", path.display(), e.message())))?;
            if let Some(name) = user.get("experiment").and_then(|v| v.as_str()) {
                if name != defaults.experiment {
                    return Err(config_error(
                        "experiment",
                        &format!("file is for `{name}` but `{}` was requested", defaults.experiment),
                    ));
                }
            }
            merge(&mut table, user);
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| {
            Error::Config {
                field: "config".into(),
                message: e.message().to_string(),
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.operator.validate(&self.domain)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Float(x)) => Ok(*x),
            Some(toml::Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected a number")),
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected a non-negative integer")),
        }
    }

    pub fn param_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(i) => Ok(*i as f64),
                    _ => Err(config_error(&format!("params.{key}"), "expected an array of numbers")),
                })
                .collect(),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected an array of numbers")),
        }
    }

    pub fn param_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                    _ => Err(config_error(&format!("params.{key}"), "expected an array of non-negative integers")),
                })
                .collect(),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected an array of non-negative integers")),
        }
    }

    pub fn param_str(&self, key: &str, default: &str) -> Result<String> {
        match self.params.get(key) {
            None => Ok(default.to_string()),
            Some(toml::Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(config_error(&format!("params.{key}"), "expected a string")),
        }
    }

    /// Sets a parameter (used to build per-experiment defaults).
    pub fn with_param(mut self, key: &str, value: impl Into<toml::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

fn merge(base: &mut toml::Table, other: toml::Table) {
    for (k, v) in other {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `a.b.c=value`; the value is read as a TOML value and falls back
/// to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_error(assignment, "override must have the form key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_error(key, "empty key segment"));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_error(key, &format!("`{part}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn defaults_file_and_overrides_layer() {
        let defaults = ExperimentConfig::new("exp_x").with_param("alpha", 1.0);
        let f = write("[domain]\nroots = 2\n[params]\nbeta = 3\n");
        let sets = vec!["params.alpha=0.25".to_string(), "operator.seed=9".to_string()];
        let c = ExperimentConfig::assemble(&defaults, Some(f.path()), &sets).unwrap();
        assert_eq!(c.domain.vertex_set().unwrap().len(), 2);
        assert_eq!(c.param_f64("alpha", 0.0).unwrap(), 0.25);
        assert_eq!(c.param_usize("beta", 0).unwrap(), 3);
        assert_eq!(c.operator.seed, 9);
        // round trip through TOML
        let again: ExperimentConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn validation_names_the_field() {
        let defaults = ExperimentConfig::new("exp_x");
        let f = write("[domain]\nvertices = [[1.0, 0.0], [0.0, 1.2]]\n");
        match ExperimentConfig::assemble(&defaults, Some(f.path()), &[]) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "domain.vertices[1]"),
            other => panic!("{other:?}"),
        }
        for (set, field) in [
            ("domain.r=1.5", "domain.r"),
            ("domain.s=0.5", "domain.s"),
            ("operator.condition_cap=0.5", "operator.condition_cap"),
            ("operator.p=0.5", "operator.p"),
            ("params.alpha=\"x\"", "params.alpha"),
        ] {
            let r = ExperimentConfig::assemble(&defaults, None, &[set.to_string()])
                .and_then(|c| c.param_f64("alpha", 1.0).map(|_| c));
            match r {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{set}"),
                other => panic!("{set}: {other:?}"),
            }
        }
        let r = ExperimentConfig::assemble(&defaults, None, &["domain.roots=3".into(), "domain.r=0.3".into()]);
        assert!(matches!(r, Err(Error::Config { field, .. }) if field == "domain.r"));
        assert!(ExperimentConfig::assemble(&defaults, None, &["nonsense".into()]).is_err());
        assert!(ExperimentConfig::assemble(&defaults, None, &["domain.bogus=1".into()]).is_err());
        let other = write("experiment = \"exp_y\"\n");
        assert!(ExperimentConfig::assemble(&defaults, Some(other.path()), &[]).is_err());
    }

    #[test]
    fn output_dir_resolution() {
        let o = OutputSpec { dir: Some("x/y".into()) };
        assert_eq!(o.resolve(), PathBuf::from("x/y"));
    }
}
