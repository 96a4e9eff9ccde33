use std::sync::Arc;

use rayon::prelude::*;

use super::episode::{run_oracle_replication, run_replication};
use super::regret::{episode_regret, RegretCurve, RegretMode};
use super::{Budget, EngineError, Trace};
use crate::environment::{argmax, Environment};
use crate::policies::PolicyConfig;
use crate::schedule::Round;

/// Replications handed to the worker pool at a time; bounds peak memory.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub budget: Budget,
    pub replications: usize,
    pub base_seed: u64,
    /// Worker cap; `None` uses every available core.
    pub parallelism: Option<usize>,
    pub mode: RegretMode,
}

/// What one replication of one policy contributes to the aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub regret: Vec<f64>,
    pub optimal: Vec<bool>,
    pub arms: Vec<usize>,
    pub stopping_round: Round,
    pub total_cost: f64,
    pub max_cost: f64,
}

impl ReplicationOutcome {
    pub fn new(env: &Environment, trace: &Trace, oracle: &Trace, mode: RegretMode) -> Self {
        Self {
            regret: episode_regret(env, trace, oracle, mode),
            optimal: trace.steps.iter().map(|s| s.arm == env.best_arm(s.round)).collect(),
            arms: trace.arms().collect(),
            stopping_round: trace.stopping_round(),
            total_cost: trace.total_cost(),
            max_cost: trace.max_cost(),
        }
    }

    /// Overshoot bound and the initialization phase.
    pub fn meets_budget_contract(&self, budget: Budget, arms: usize) -> bool {
        self.total_cost <= budget.get() + self.max_cost && self.stopping_round >= arms as Round
    }
}

/// Per-round sums over replications. Merging is element-wise addition plus
/// concatenation of the per-replication lists.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Accumulator {
    arms: usize,
    reached: Vec<u64>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    optimal: Vec<u64>,
    /// Row-major `round × arm` play counts.
    arm_counts: Vec<u64>,
    finals: Vec<f64>,
    stopping: Vec<Round>,
    contract_violations: usize,
}

impl Accumulator {
    pub fn new(arms: usize) -> Self {
        Self {
            arms,
            ..Self::default()
        }
    }

    fn grow(&mut self, len: usize) {
        if self.reached.len() < len {
            self.reached.resize(len, 0);
            self.sum.resize(len, 0.0);
            self.sum_sq.resize(len, 0.0);
            self.optimal.resize(len, 0);
            self.arm_counts.resize(len * self.arms, 0);
        }
    }

    pub fn add(&mut self, outcome: &ReplicationOutcome, budget: Budget) {
        self.grow(outcome.regret.len());
        for (n, &x) in outcome.regret.iter().enumerate() {
            self.reached[n] += 1;
            self.sum[n] += x;
            self.sum_sq[n] += x * x;
            self.optimal[n] += u64::from(outcome.optimal[n]);
            self.arm_counts[n * self.arms + outcome.arms[n]] += 1;
        }
        self.finals.push(outcome.regret.last().copied().unwrap_or(0.0));
        self.stopping.push(outcome.stopping_round);
        if !outcome.meets_budget_contract(budget, self.arms) {
            self.contract_violations += 1;
        }
    }

    pub fn merge(mut self, other: Accumulator) -> Accumulator {
        assert_eq!(self.arms, other.arms, "merging accumulators over different arm sets");
        self.grow(other.reached.len());
        for n in 0..other.reached.len() {
            self.reached[n] += other.reached[n];
            self.sum[n] += other.sum[n];
            self.sum_sq[n] += other.sum_sq[n];
            self.optimal[n] += other.optimal[n];
        }
        for (a, b) in self.arm_counts.iter_mut().zip(&other.arm_counts) {
            *a += b;
        }
        self.finals.extend(other.finals);
        self.stopping.extend(other.stopping);
        self.contract_violations += other.contract_violations;
        self
    }

    pub fn replications(&self) -> usize {
        self.finals.len()
    }

    pub fn min_stopping(&self) -> Round {
        self.stopping.iter().copied().min().unwrap_or(0)
    }

    /// Mean and standard error at round `n` (1-based) over the replications
    /// that reached it.
    pub fn moments(&self, n: Round) -> (f64, f64) {
        let i = n as usize - 1;
        let k = self.reached[i] as f64;
        let m = self.sum[i] / k;
        if self.reached[i] < 2 {
            return (m, 0.0);
        }
        let second = self.sum_sq[i] / k;
        let spread = second - m * m;
        // Differences at the rounding level of the raw moment are zero.
        if spread <= 1e-12 * second {
            return (m, 0.0);
        }
        let var = spread * k / (k - 1.0);
        (m, (var / k).sqrt())
    }

    fn summarize(&self, config: PolicyConfig, truncation: Round) -> PolicySummary {
        let (mean_curve, stderr_curve) = (1..=truncation).map(|n| self.moments(n)).unzip();
        let rounds = 0..truncation as usize;
        PolicySummary {
            config,
            curve: RegretCurve {
                mean: mean_curve,
                stderr: stderr_curve,
                finals: self.finals.clone(),
                truncation_round: truncation,
            },
            optimal_play_rate: rounds
                .clone()
                .map(|i| self.optimal[i] as f64 / self.reached[i] as f64)
                .collect(),
            modal_arm: rounds
                .map(|i| argmax(self.arm_counts[i * self.arms..(i + 1) * self.arms].iter().map(|&c| c as f64)))
                .collect(),
            stopping: self.stopping.clone(),
            contract_violations: self.contract_violations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub config: PolicyConfig,
    pub curve: RegretCurve,
    /// Fraction of replications playing the oracle's arm, per round.
    pub optimal_play_rate: Vec<f64>,
    /// Most played arm per round, lowest index on ties.
    pub modal_arm: Vec<usize>,
    /// `T(B)` of each replication in replication order.
    pub stopping: Vec<Round>,
    /// Traces violating the overshoot bound or ending before every arm was tried.
    pub contract_violations: usize,
}

impl PolicySummary {
    /// Regret at the common truncation round, the last point of the curve.
    pub fn truncated_regret(&self) -> Summary {
        Summary {
            mean: self.curve.mean.last().copied().unwrap_or(0.0),
            stderr: self.curve.stderr.last().copied().unwrap_or(0.0),
        }
    }

    /// Whole-episode regret, each replication up to its own stopping round.
    pub fn final_regret(&self) -> Summary {
        Summary {
            mean: self.curve.final_regret(),
            stderr: self.curve.final_stderr(),
        }
    }

    pub fn mean_stopping(&self) -> f64 {
        self.stopping.iter().map(|&t| t as f64).sum::<f64>() / self.stopping.len() as f64
    }

    pub fn min_stopping(&self) -> Round {
        self.stopping.iter().copied().min().unwrap_or(0)
    }

    pub fn max_stopping(&self) -> Round {
        self.stopping.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResults {
    pub mode: RegretMode,
    pub budget: Budget,
    pub policies: Vec<PolicySummary>,
    /// Shortest episode over every policy and replication.
    pub truncation_round: Round,
    /// Oracle arm at rounds `1..=truncation_round`.
    pub oracle_arm: Vec<usize>,
    /// Oracle cumulative reward of each replication.
    pub oracle_rewards: Vec<f64>,
    pub oracle_stopping: Vec<Round>,
}

struct Replication {
    oracle_reward: f64,
    oracle_stopping: Round,
    outcomes: Vec<ReplicationOutcome>,
}

fn replicate(
    env: &Arc<Environment>,
    policies: &[PolicyConfig],
    cfg: &McConfig,
    rep: u64,
) -> Result<Replication, EngineError> {
    let oracle = run_oracle_replication(env, cfg.budget, cfg.base_seed, rep);
    let outcomes = policies
        .iter()
        .map(|p| {
            let trace = run_replication(p, env, cfg.budget, cfg.base_seed, rep)?;
            Ok(ReplicationOutcome::new(env, &trace, &oracle, cfg.mode))
        })
        .collect::<Result<_, EngineError>>()?;
    Ok(Replication {
        oracle_reward: oracle.total_reward(),
        oracle_stopping: oracle.stopping_round(),
        outcomes,
    })
}

/// Runs every policy for `cfg.replications` seeded episodes. Replications
/// run concurrently and are folded in index order, so results do not depend
/// on the worker count.
pub fn monte_carlo(
    env: &Arc<Environment>,
    policies: &[PolicyConfig],
    cfg: &McConfig,
) -> Result<McResults, EngineError> {
    if cfg.replications == 0 {
        return Err(EngineError::NoReplications);
    }
    for p in policies {
        p.validate(env)?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.parallelism {
        if n == 0 {
            return Err(EngineError::ZeroParallelism);
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| EngineError::ThreadPool(e.to_string()))?;

    let mut accs: Vec<Accumulator> = policies.iter().map(|_| Accumulator::new(env.num_arms())).collect();
    let mut oracle_rewards = Vec::with_capacity(cfg.replications);
    let mut oracle_stopping = Vec::with_capacity(cfg.replications);
    let reps: Vec<u64> = (0..cfg.replications as u64).collect();
    for batch in reps.chunks(BATCH) {
        let results: Vec<Replication> = pool.install(|| {
            batch
                .par_iter()
                .map(|&rep| replicate(env, policies, cfg, rep))
                .collect::<Result<_, _>>()
        })?;
        for r in results {
            oracle_rewards.push(r.oracle_reward);
            oracle_stopping.push(r.oracle_stopping);
            for (acc, o) in accs.iter_mut().zip(&r.outcomes) {
                acc.add(o, cfg.budget);
            }
        }
    }

    let truncation = accs.iter().map(Accumulator::min_stopping).min().unwrap_or(0);
    Ok(McResults {
        mode: cfg.mode,
        budget: cfg.budget,
        policies: policies
            .iter()
            .zip(&accs)
            .map(|(p, acc)| acc.summarize(p.clone(), truncation))
            .collect(),
        truncation_round: truncation,
        oracle_arm: (1..=truncation).map(|n| env.best_arm(n)).collect(),
        oracle_rewards,
        oracle_stopping,
    })
}
