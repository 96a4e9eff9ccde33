use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::streams::{stream, Role};
use super::EngineError;
use crate::environment::Environment;
use crate::policies::{oracle_select, Policy, PolicyConfig};
use crate::schedule::Round;

/// Total energy allowance.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Budget(f64);

impl Budget {
    /// Accepts any finite `B ≥ 0`; scenarios additionally require `B > 0`.
    pub fn new(b: f64) -> Result<Self, EngineError> {
        if b >= 0.0 && b.is_finite() {
            Ok(Self(b))
        } else {
            Err(EngineError::InvalidBudget(b))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Budget {
    type Error = EngineError;
    fn try_from(b: f64) -> Result<Self, Self::Error> {
        Self::new(b)
    }
}

impl From<Budget> for f64 {
    fn from(b: Budget) -> f64 {
        b.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub round: Round,
    pub arm: usize,
    pub reward: f64,
    pub cost: f64,
    /// Cumulative cost after this round.
    pub spent: f64,
}

/// Rounds `1..=T(B)` of one episode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub steps: Vec<Step>,
}

impl Trace {
    fn push(&mut self, arm: usize, reward: f64, cost: f64) {
        let spent = self.total_cost() + cost;
        let round = self.steps.len() as Round + 1;
        self.steps.push(Step {
            round,
            arm,
            reward,
            cost,
            spent,
        });
    }

    /// `T(B)`, the number of rounds played.
    pub fn stopping_round(&self) -> Round {
        self.steps.len() as Round
    }

    pub fn total_cost(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.spent)
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn max_cost(&self) -> f64 {
        self.steps.iter().map(|s| s.cost).fold(0.0, f64::max)
    }

    pub fn arms(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.arm)
    }
}

/// Plays every arm once, then keeps selecting while the cumulative cost is
/// within budget. The pull that crosses the budget is kept.
pub fn play(
    policy: &mut dyn Policy,
    env: &Environment,
    budget: Budget,
    env_rng: &mut dyn RngCore,
    policy_rng: &mut dyn RngCore,
) -> Trace {
    let mut trace = Trace::default();
    for arm in 0..env.num_arms() {
        let round = trace.stopping_round() + 1;
        let obs = env.pull(arm, round, env_rng).expect("initial arms are in range");
        policy.observe(round, arm, obs);
        trace.push(arm, obs.reward, obs.cost);
    }
    while trace.total_cost() <= budget.get() {
        let round = trace.stopping_round() + 1;
        let arm = policy.select(round, policy_rng);
        let obs = env.pull(arm, round, env_rng).expect("policy chose a valid arm");
        policy.observe(round, arm, obs);
        trace.push(arm, obs.reward, obs.cost);
    }
    trace
}

/// Plays the true best arm each round with no exploration phase. A zero
/// budget yields an empty trace.
pub fn play_oracle(env: &Environment, budget: Budget, env_rng: &mut dyn RngCore) -> Trace {
    let mut trace = Trace::default();
    if budget.get() == 0.0 {
        return trace;
    }
    while trace.total_cost() <= budget.get() {
        let round = trace.stopping_round() + 1;
        let arm = oracle_select(env, round);
        let obs = env.pull(arm, round, env_rng).expect("oracle arm is valid");
        trace.push(arm, obs.reward, obs.cost);
    }
    trace
}

/// Policy stream identity: stable across scenario orderings.
pub(crate) fn policy_stream_id(cfg: &PolicyConfig) -> u64 {
    cfg.kind as u64
}

/// One seeded episode: replication 0 of `seed`.
pub fn run_episode(
    cfg: &PolicyConfig,
    env: &Arc<Environment>,
    budget: Budget,
    seed: u64,
) -> Result<Trace, EngineError> {
    run_replication(cfg, env, budget, seed, 0)
}

pub(crate) fn run_replication(
    cfg: &PolicyConfig,
    env: &Arc<Environment>,
    budget: Budget,
    base_seed: u64,
    replication: u64,
) -> Result<Trace, EngineError> {
    if cfg.kind == crate::policies::PolicyKind::Oracle {
        return Ok(run_oracle_replication(env, budget, base_seed, replication));
    }
    let mut policy = cfg.build(env)?;
    let mut env_rng = stream(base_seed, replication, Role::Environment);
    let mut policy_rng = stream(base_seed, replication, Role::Policy(policy_stream_id(cfg)));
    Ok(play(policy.as_mut(), env, budget, &mut env_rng, &mut policy_rng))
}

pub fn oracle_episode(env: &Environment, budget: Budget, seed: u64) -> Trace {
    run_oracle_replication(env, budget, seed, 0)
}

pub(crate) fn run_oracle_replication(
    env: &Environment,
    budget: Budget,
    base_seed: u64,
    replication: u64,
) -> Trace {
    let mut rng = stream(base_seed, replication, Role::Oracle);
    play_oracle(env, budget, &mut rng)
}
