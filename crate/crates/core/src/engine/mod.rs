//! Budgeted episodes, regret accounting and replicated runs.

mod episode;
mod monte_carlo;
mod regret;
pub mod streams;

pub use episode::{oracle_episode, play, play_oracle, run_episode, Budget, Step, Trace};
pub use monte_carlo::{
    monte_carlo, Accumulator, McConfig, McResults, PolicySummary, ReplicationOutcome, Summary,
};
pub use regret::{episode_regret, regret_curves, RegretCurve, RegretMode};

use thiserror::Error;

use crate::policies::PolicyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("budget must be finite and non-negative, got {0}")]
    InvalidBudget(f64),
    #[error("at least one replication is required")]
    NoReplications,
    #[error("{policy} policy replications against {oracle} oracle replications")]
    MismatchedReplications { policy: usize, oracle: usize },
    #[error("parallelism must be at least 1")]
    ZeroParallelism,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}
