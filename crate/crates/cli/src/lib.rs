//! Experiment harness around the `budgeted-bandit` library: scenario files,
//! simulations, parameter sweeps, analytic tables, bound evaluation and
//! sampler validation.

pub mod commands;
pub mod scenario;
pub mod validate;

use std::path::PathBuf;

use budgeted_bandit::bound::BoundError;
use budgeted_bandit::engine::EngineError;
use thiserror::Error;

pub use scenario::{load_scenario, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("arm {arm} from round {round}: {law} is {distance:.3e}, tolerance {tolerance:.0e}")]
    Tolerance {
        arm: usize,
        round: u64,
        law: &'static str,
        distance: f64,
        tolerance: f64,
    },
}

impl CliError {
    /// Short name of the error class, printed with every failure.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Scenario(ScenarioError::Io { .. }) => "io",
            CliError::Scenario(ScenarioError::Parse { .. }) => "parse",
            CliError::Scenario(ScenarioError::Invalid { .. }) => "invalid-scenario",
            CliError::Engine(_) => "engine",
            CliError::Bound(_) => "bound",
            CliError::Io { .. } | CliError::Csv { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Tolerance { .. } => "validation",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "usage" => 2,
            "parse" | "invalid-scenario" => 3,
            "io" => 4,
            "validation" => 5,
            _ => 1,
        }
    }
}
