use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EngineError, Trace};
use crate::environment::Environment;
use crate::schedule::Round;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegretMode {
    /// Oracle's sampled rewards minus the policy's sampled rewards.
    Empirical,
    /// Sum of `μ_{i*,θ} − μ_{I_θ,θ}` over the rounds played.
    #[default]
    Pseudo,
}

impl RegretMode {
    pub fn name(self) -> &'static str {
        match self {
            RegretMode::Empirical => "empirical",
            RegretMode::Pseudo => "pseudo",
        }
    }
}

impl fmt::Display for RegretMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RegretMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "empirical" => Ok(RegretMode::Empirical),
            "pseudo" => Ok(RegretMode::Pseudo),
            _ => Err(format!("unknown regret mode {s:?}, expected empirical or pseudo")),
        }
    }
}

/// Cumulative regret after each round `1..=T` of `trace`.
///
/// Empirical mode charges the oracle's rewards up to its own stopping round,
/// so the last entry is `Σ_{θ≤T*} r*_θ − Σ_{θ≤T} r_θ` when `T ≥ T*`.
pub fn episode_regret(env: &Environment, trace: &Trace, oracle: &Trace, mode: RegretMode) -> Vec<f64> {
    let mut total = 0.0;
    let mut oracle_total = 0.0;
    let mut out = Vec::with_capacity(trace.steps.len());
    for (i, step) in trace.steps.iter().enumerate() {
        match mode {
            RegretMode::Pseudo => {
                let means = env.means_at(step.round);
                total += means[env.best_arm(step.round)].0 - means[step.arm].0;
                out.push(total);
            }
            RegretMode::Empirical => {
                if let Some(o) = oracle.steps.get(i) {
                    oracle_total += o.reward;
                }
                total += step.reward;
                out.push(oracle_total - total);
            }
        }
    }
    if mode == RegretMode::Empirical {
        // A policy that stopped before the oracle is still charged the
        // oracle's remaining rewards.
        let rest: f64 = oracle.steps.iter().skip(trace.steps.len()).map(|s| s.reward).sum();
        if let Some(last) = out.last_mut() {
            *last += rest;
        }
    }
    out
}

/// Replicated regret of one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    /// Mean cumulative regret at rounds `1..=truncation_round`.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Whole-episode regret of each replication.
    pub finals: Vec<f64>,
    pub truncation_round: Round,
}

impl RegretCurve {
    pub fn final_regret(&self) -> f64 {
        mean(&self.finals)
    }

    pub fn final_stderr(&self) -> f64 {
        stderr(&self.finals)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean, 0 for a single value.
pub(crate) fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Mean regret curve over paired replications, truncated at the shortest
/// episode.
pub fn regret_curves(
    env: &Environment,
    policy_traces: &[Trace],
    oracle_traces: &[Trace],
    mode: RegretMode,
) -> Result<RegretCurve, EngineError> {
    if policy_traces.len() != oracle_traces.len() {
        return Err(EngineError::MismatchedReplications {
            policy: policy_traces.len(),
            oracle: oracle_traces.len(),
        });
    }
    if policy_traces.is_empty() {
        return Err(EngineError::NoReplications);
    }
    let per_rep: Vec<Vec<f64>> = policy_traces
        .iter()
        .zip(oracle_traces)
        .map(|(t, o)| episode_regret(env, t, o, mode))
        .collect();
    let truncation = per_rep.iter().map(Vec::len).min().unwrap_or(0);
    let mut mean_curve = Vec::with_capacity(truncation);
    let mut stderr_curve = Vec::with_capacity(truncation);
    for n in 0..truncation {
        let column: Vec<f64> = per_rep.iter().map(|c| c[n]).collect();
        mean_curve.push(mean(&column));
        stderr_curve.push(stderr(&column));
    }
    Ok(RegretCurve {
        mean: mean_curve,
        stderr: stderr_curve,
        finals: per_rep.iter().map(|c| c.last().copied().unwrap_or(0.0)).collect(),
        truncation_round: truncation as Round,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{oracle_episode, Budget, Step};
    use crate::environment::fixtures::{stationary, table2};

    fn trace(arms_rewards: &[(usize, f64)]) -> Trace {
        let mut spent = 0.0;
        Trace {
            steps: arms_rewards
                .iter()
                .enumerate()
                .map(|(i, &(arm, reward))| {
                    spent += 1.0;
                    Step {
                        round: i as Round + 1,
                        arm,
                        reward,
                        cost: 1.0,
                        spent,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn oracle_against_itself_has_zero_pseudo_regret() {
        let env = table2();
        let o = oracle_episode(&env, Budget::new(3000.0).unwrap(), 4);
        let r = episode_regret(&env, &o, &o, RegretMode::Pseudo);
        assert!(r.iter().all(|&x| x == 0.0));
        let e = episode_regret(&env, &o, &o, RegretMode::Empirical);
        assert!(e.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn never_optimal_accumulates_the_gap() {
        let env = stationary(&[(0.5, 1.5), (0.3, 1.5)], 1.0);
        let t = trace(&[(1, 0.0); 50]);
        let r = episode_regret(&env, &t, &Trace::default(), RegretMode::Pseudo);
        for (n, x) in r.iter().enumerate() {
            assert!((x - 0.2 * (n + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_mode_is_the_literal_difference() {
        let env = stationary(&[(0.5, 1.5), (0.3, 1.5)], 1.0);
        let oracle = trace(&[(0, 1.0), (0, 1.0), (0, 0.0), (0, 1.0)]);
        let short = trace(&[(1, 1.0), (0, 0.0)]);
        let long = trace(&[(1, 0.0), (0, 1.0), (1, 1.0), (0, 1.0), (0, 1.0), (1, 1.0)]);
        assert_eq!(episode_regret(&env, &short, &oracle, RegretMode::Empirical), vec![0.0, 3.0 - 1.0]);
        assert_eq!(
            episode_regret(&env, &long, &oracle, RegretMode::Empirical),
            vec![1.0, 1.0, 0.0, 0.0, -1.0, -2.0]
        );
    }

    #[test]
    fn curves_truncate_and_check_pairing() {
        let env = stationary(&[(0.5, 1.5), (0.3, 1.5)], 1.0);
        let a = trace(&[(1, 0.0); 5]);
        let b = trace(&[(0, 0.0), (1, 0.0), (1, 0.0)]);
        let o = Trace::default();
        let c = regret_curves(&env, &[a.clone(), b], &[o.clone(), o.clone()], RegretMode::Pseudo).unwrap();
        assert_eq!(c.truncation_round, 3);
        assert_eq!(c.mean.len(), 3);
        assert!((c.mean[2] - (0.6 + 0.4) / 2.0).abs() < 1e-12);
        assert!((c.final_regret() - (1.0 + 0.4) / 2.0).abs() < 1e-12);
        assert!(matches!(
            regret_curves(&env, &[a], &[o.clone(), o], RegretMode::Pseudo),
            Err(EngineError::MismatchedReplications { policy: 1, oracle: 2 })
        ));
    }

    #[test]
    fn mode_names() {
        assert_eq!("pseudo".parse::<RegretMode>().unwrap(), RegretMode::Pseudo);
        assert_eq!(RegretMode::Empirical.to_string(), "empirical");
        assert!("expected".parse::<RegretMode>().is_err());
    }
}
