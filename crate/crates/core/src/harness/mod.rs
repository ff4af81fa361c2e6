//! Experiment harness: configuration, operator generation, the registered
//! experiments and their reports.

pub mod config;
pub mod experiments;
pub mod generator;
pub mod report;
pub mod textio;

use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
pub use config::ExperimentConfig;
pub use experiments::{Experiment, Topic, REGISTRY};
pub use report::{Check, ExperimentReport};

/// The registered experiment called `name`.
pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

/// Names of all registered experiments.
pub fn names() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.name).collect()
}

/// Assembles the configuration (defaults, then `file`, then `overrides`)
/// and runs the experiment, recording the wall time.
pub fn run_experiment(name: &str, file: Option<&Path>, overrides: &[String]) -> Result<ExperimentReport> {
    let exp = find(name).ok_or_else(|| Error::UnknownExperiment(name.to_string()))?;
    let config = ExperimentConfig::assemble(&(exp.defaults)(), file, overrides)?;
    run_config(exp, &config)
}

pub fn run_config(exp: &Experiment, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = (exp.run)(config)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn every_topic_is_covered() {
        let covered: HashSet<Topic> = REGISTRY.iter().flat_map(|e| e.topics.iter().copied()).collect();
        for t in Topic::ALL {
            assert!(covered.contains(&t), "{t:?} has no experiment");
        }
    }

    #[test]
    fn names_are_unique_and_defaults_validate() {
        let set: HashSet<&str> = names().into_iter().collect();
        assert_eq!(set.len(), REGISTRY.len());
        for e in &REGISTRY {
            let c = (e.defaults)();
            assert_eq!(c.experiment, e.name);
            c.validate().unwrap();
        }
    }

    #[test]
    fn unknown_experiment_is_an_error() {
        let err = run_experiment("exp_nope", None, &[]).unwrap_err();
        assert!(err.to_string().contains("exp_nope"));
    }
}
