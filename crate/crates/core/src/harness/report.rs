//! Experiment reports and artifact output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::rademacher::{RadEstimate, RadMethod};

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed form or direct finite computation.
    Exact,
    /// Full enumeration of sign patterns.
    Enumeration,
    MonteCarlo,
    /// Sampled supremum, regression or other fitted quantity.
    Fitted,
}

impl From<RadMethod> for Method {
    fn from(m: RadMethod) -> Self {
        match m {
            RadMethod::HilbertExact => Method::Exact,
            RadMethod::Enumeration => Method::Enumeration,
            RadMethod::MonteCarlo => Method::MonteCarlo,
        }
    }
}

/// Comparison a check asserts between its value and bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// `value` holds a boolean as 0/1 and must be 1.
    Holds,
    /// Reported only.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub relation: Relation,
    pub pass: bool,
    pub method: Method,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    fn make(name: &str, value: f64, bound: Option<f64>, relation: Relation, method: Method, samples: usize) -> Self {
        let pass = match relation {
            Relation::AtMost => bound.is_some_and(|b| value <= b),
            Relation::AtLeast => bound.is_some_and(|b| value >= b),
            Relation::Holds => value == 1.0,
            Relation::Info => true,
        };
        Self {
            name: name.to_string(),
            value,
            bound,
            relation,
            pass,
            method,
            samples,
            note: String::new(),
        }
    }

    pub fn at_most(name: &str, value: f64, bound: f64, method: Method, samples: usize) -> Self {
        Self::make(name, value, Some(bound), Relation::AtMost, method, samples)
    }

    pub fn at_least(name: &str, value: f64, bound: f64, method: Method, samples: usize) -> Self {
        Self::make(name, value, Some(bound), Relation::AtLeast, method, samples)
    }

    pub fn holds(name: &str, ok: bool, method: Method, samples: usize) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, None, Relation::Holds, method, samples)
    }

    pub fn info(name: &str, value: f64, method: Method, samples: usize) -> Self {
        Self::make(name, value, None, Relation::Info, method, samples)
    }

    pub fn from_rad(name: &str, est: &RadEstimate) -> Self {
        let mut c = Self::info(name, est.value, est.method.into(), est.samples);
        if est.std_error > 0.0 {
            c.note = format!("std_error {:.3e}", est.std_error);
        }
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn asserted(&self) -> bool {
        self.relation != Relation::Info
    }
}

/// A CSV table produced by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    #[serde(skip)]
    pub contents: String,
    /// Set once written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub inputs: ExperimentConfig,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.clone(),
            inputs: config.clone(),
            checks: Vec::new(),
            artifacts: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn artifact(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact {
            name: name.to_string(),
            contents,
            path: None,
        });
    }

    /// True when every asserted check passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// JSON of everything except the wall time; identical for identical
    /// config and seed.
    pub fn body_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary, one line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment {}", self.experiment);
        for c in &self.checks {
            let status = match (c.asserted(), c.pass) {
                (false, _) => "INFO",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            let rel = match (c.relation, c.bound) {
                (Relation::AtMost, Some(b)) => format!(" <= {b:.6e}"),
                (Relation::AtLeast, Some(b)) => format!(" >= {b:.6e}"),
                _ => String::new(),
            };
            let _ = write!(
                out,
                "  {status} {:<48} {:.6e}{rel} [{:?}, n={}]",
                c.name, c.value, c.method, c.samples
            );
            if !c.note.is_empty() {
                let _ = write!(out, " {}", c.note);
            }
            out.push('\n');
        }
        for a in &self.artifacts {
            if let Some(p) = &a.path {
                let _ = writeln!(out, "  artifact {}", p.display());
            }
        }
        let _ = writeln!(
            out,
            "result {} ({} checks, {} failed, {:.2} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.failures().len(),
            self.wall_time_s
        );
        out
    }

    /// Writes `report.json` and the CSV artifacts under `dir/<experiment>/`.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        let base = dir.join(&self.experiment);
        std::fs::create_dir_all(&base)?;
        for a in &mut self.artifacts {
            let path = base.join(format!("{}.csv", a.name));
            std::fs::write(&path, &a.contents)?;
            a.path = Some(path);
        }
        let path = base.join("report.json");
        std::fs::write(&path, self.to_json())?;
        Ok(path)
    }
}

/// CSV from a header and rows of numbers.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_and_report() {
        let cfg = ExperimentConfig::new("exp_demo");
        let mut r = ExperimentReport::new(&cfg);
        r.push(Check::at_most("small", 0.5, 1.0, Method::Exact, 1));
        r.push(Check::at_least("large", 2.0, 1.0, Method::Fitted, 3));
        r.push(Check::info("shown", 7.0, Method::MonteCarlo, 100));
        assert!(r.passed());
        r.push(Check::holds("broken", false, Method::Exact, 1));
        assert!(!r.passed());
        assert_eq!(r.failures().len(), 1);
        r.artifact("curve", csv_table(&["x", "y"], &[vec![1.0, 2.0]]));
        let dir = tempfile::tempdir().unwrap();
        let path = r.write(dir.path()).unwrap();
        assert!(path.exists());
        assert!(dir.path().join("exp_demo/curve.csv").exists());
        let text = r.to_text();
        assert!(text.contains("FAIL broken") && text.contains("INFO shown"));
        r.wall_time_s = 3.0;
        let body = r.body_json();
        assert!(body.contains("\"wall_time_s\": 0.0"));
        let parsed: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(parsed.checks, r.checks);
    }
}
