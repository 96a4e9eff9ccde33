//! Scenario documents: one TOML file naming the environment, the policies
//! and the run settings.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use budgeted_bandit::engine::{Budget, RegretMode};
use budgeted_bandit::environment::Environment;
use budgeted_bandit::policies::PolicyConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TABLE2: &str = include_str!("../scenarios/table2.toml");
pub const PHYSICAL: &str = include_str!("../scenarios/physical.toml");

/// Built-in scenarios by name.
pub const BUILTINS: [(&str, &str); 2] = [("table2", TABLE2), ("physical", PHYSICAL)];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario {origin} does not parse: {message}")]
    Parse { origin: String, message: String },
    #[error("scenario {origin} is invalid: {message}")]
    Invalid { origin: String, message: String },
}

fn default_replications() -> usize {
    100
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub budget: Budget,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub regret_mode: RegretMode,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub environment: Arc<Environment>,
    pub policies: Vec<PolicyConfig>,
}

impl Scenario {
    /// Parses and validates a TOML document. `origin` names it in errors.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            origin: origin.to_owned(),
            message: e.to_string(),
        })?;
        scenario.validate().map_err(|message| ScenarioError::Invalid {
            origin: origin.to_owned(),
            message,
        })?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn builtin(name: &str) -> Option<Self> {
        BUILTINS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::from_toml(text, n).expect("built-in scenarios are valid"))
    }

    /// Checks the cross-field constraints the schema alone cannot express.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.budget.get() > 0.0) {
            return Err(format!("budget must be positive, got {}", self.budget.get()));
        }
        if self.replications == 0 {
            return Err("replications must be at least 1".into());
        }
        if self.policies.is_empty() {
            return Err("at least one policy is required".into());
        }
        for (i, p) in self.policies.iter().enumerate() {
            p.validate(&self.environment)
                .map_err(|e| format!("policies[{i}]: {e}"))?;
        }
        Ok(())
    }
}

/// Loads a scenario file, or a built-in scenario when `path` names one and
/// no such file exists.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    if !path.exists() {
        if let Some(s) = path.to_str().and_then(Scenario::builtin) {
            return Ok(s);
        }
    }
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_owned(),
        source,
    })?;
    Scenario::from_toml(&text, &path.display().to_string())
}
