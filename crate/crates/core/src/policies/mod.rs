//! Arm-selection policies behind one sequential interface.

mod baselines;
mod swucb;
mod window;

pub use baselines::{baseline_index, EpsilonGreedy, IndexPolicy, IndexRule};
pub use swucb::{swucb_index, swucb_padding, SlidingWindowUcb, SwucbParams};
pub use window::{HistoryStats, WindowStats};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{Environment, Observation};
use crate::schedule::Round;

pub const DEFAULT_XI: f64 = 0.6;
pub const DEFAULT_TAU: usize = 2000;

pub trait Policy: Send {
    /// Arm to play at `round`.
    fn select(&mut self, round: Round, rng: &mut dyn RngCore) -> usize;
    fn observe(&mut self, round: Round, arm: usize, obs: Observation);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "BPRPC-SWUCB")]
    BprpcSwucb,
    #[serde(rename = "KUBE")]
    Kube,
    #[serde(rename = "UCB1")]
    Ucb1,
    #[serde(rename = "UCB-based")]
    UcbBased,
    #[serde(rename = "UCB-BV1")]
    UcbBv1,
    #[serde(rename = "EpsGreedy")]
    EpsGreedy,
    #[serde(rename = "Oracle")]
    Oracle,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::BprpcSwucb,
        PolicyKind::Kube,
        PolicyKind::Ucb1,
        PolicyKind::UcbBased,
        PolicyKind::UcbBv1,
        PolicyKind::EpsGreedy,
        PolicyKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::BprpcSwucb => "BPRPC-SWUCB",
            PolicyKind::Kube => "KUBE",
            PolicyKind::Ucb1 => "UCB1",
            PolicyKind::UcbBased => "UCB-based",
            PolicyKind::UcbBv1 => "UCB-BV1",
            PolicyKind::EpsGreedy => "EpsGreedy",
            PolicyKind::Oracle => "Oracle",
        }
    }

    fn uses_xi(self) -> bool {
        matches!(self, PolicyKind::BprpcSwucb | PolicyKind::Ucb1 | PolicyKind::UcbBased)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PolicyError::UnknownKind(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("unknown policy kind {0:?}")]
    UnknownKind(String),
    #[error("{kind}: exploration weight xi = {xi} must exceed 1/2")]
    XiTooSmall { kind: PolicyKind, xi: f64 },
    #[error("{kind}: exploration weight xi = {xi} must be positive")]
    XiNotPositive { kind: PolicyKind, xi: f64 },
    #[error("{kind}: window length tau must be at least 1")]
    ZeroWindow { kind: PolicyKind },
    #[error("{kind}: r_max = {r_max} must be positive")]
    RMax { kind: PolicyKind, r_max: f64 },
    #[error("{kind}: c_min = {c_min} must be positive")]
    CMin { kind: PolicyKind, c_min: f64 },
}

/// Policy parameters as written in a scenario. `xi` is ξ, ξ' or ξ'' depending
/// on the kind. Missing bounds are taken from the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_min: Option<f64>,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            xi: None,
            tau: None,
            r_max: None,
            c_min: None,
        }
    }

    pub fn swucb(xi: f64, tau: usize) -> Self {
        Self {
            xi: Some(xi),
            tau: Some(tau),
            ..Self::new(PolicyKind::BprpcSwucb)
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = Some(xi);
        self
    }

    pub fn xi(&self) -> f64 {
        self.xi.unwrap_or(DEFAULT_XI)
    }

    pub fn tau(&self) -> usize {
        self.tau.unwrap_or(DEFAULT_TAU)
    }

    pub fn bounds(&self, env: &Environment) -> (f64, f64) {
        (
            self.r_max.unwrap_or_else(|| env.r_max()),
            self.c_min.unwrap_or_else(|| env.c_min()),
        )
    }

    /// Checks parameter constraints against the bounds `env` supplies.
    pub fn validate(&self, env: &Environment) -> Result<(), PolicyError> {
        let kind = self.kind;
        if self.kind.uses_xi() {
            let xi = self.xi();
            if kind == PolicyKind::BprpcSwucb && !(xi > 0.5) {
                return Err(PolicyError::XiTooSmall { kind, xi });
            }
            if !(xi > 0.0) {
                return Err(PolicyError::XiNotPositive { kind, xi });
            }
        }
        if kind == PolicyKind::BprpcSwucb && self.tau() == 0 {
            return Err(PolicyError::ZeroWindow { kind });
        }
        let (r_max, c_min) = self.bounds(env);
        if !(r_max > 0.0) {
            return Err(PolicyError::RMax { kind, r_max });
        }
        if !(c_min > 0.0) {
            return Err(PolicyError::CMin { kind, c_min });
        }
        Ok(())
    }

    /// Fresh policy state for one episode.
    pub fn build(&self, env: &Arc<Environment>) -> Result<Box<dyn Policy>, PolicyError> {
        self.validate(env)?;
        let arms = env.num_arms();
        let (r_max, c_min) = self.bounds(env);
        let index = |rule| Box::new(IndexPolicy::new(arms, rule, r_max, c_min)) as Box<dyn Policy>;
        Ok(match self.kind {
            PolicyKind::BprpcSwucb => Box::new(SlidingWindowUcb::new(
                arms,
                SwucbParams {
                    xi: self.xi(),
                    tau: self.tau(),
                    r_max,
                    c_min,
                },
            )),
            PolicyKind::Kube => index(IndexRule::Kube),
            PolicyKind::Ucb1 => index(IndexRule::Ucb1 { xi: self.xi() }),
            PolicyKind::UcbBased => index(IndexRule::UcbBased { xi: self.xi() }),
            PolicyKind::UcbBv1 => index(IndexRule::UcbBv1),
            PolicyKind::EpsGreedy => Box::new(EpsilonGreedy::new(arms)),
            PolicyKind::Oracle => Box::new(OraclePolicy::new(Arc::clone(env))),
        })
    }
}

/// Arm maximising the true `μ/η` at `round`, lowest index on ties.
pub fn oracle_select(env: &Environment, round: Round) -> usize {
    env.best_arm(round)
}

/// Plays [`oracle_select`] every round.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    env: Arc<Environment>,
}

impl OraclePolicy {
    pub fn new(env: Arc<Environment>) -> Self {
        Self { env }
    }
}

impl Policy for OraclePolicy {
    fn select(&mut self, round: Round, _rng: &mut dyn RngCore) -> usize {
        oracle_select(&self.env, round)
    }

    fn observe(&mut self, _round: Round, _arm: usize, _obs: Observation) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::fixtures::{stationary, table2};

    #[test]
    fn oracle_picks_best_ratio() {
        let env = table2();
        assert_eq!(oracle_select(&env, 1), 0);
        assert_eq!(oracle_select(&env, 4000), 2);
        assert_eq!(oracle_select(&stationary(&[(0.5, 2.0), (0.5, 2.0)], 1.0), 1), 0);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("SW-UCB".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn config_validation() {
        let env = table2();
        assert!(PolicyConfig::swucb(0.6, 2000).validate(&env).is_ok());
        assert!(matches!(
            PolicyConfig::swucb(0.4, 2000).validate(&env),
            Err(PolicyError::XiTooSmall { .. })
        ));
        assert!(matches!(
            PolicyConfig::swucb(0.6, 0).validate(&env),
            Err(PolicyError::ZeroWindow { .. })
        ));
        // Baselines only need a positive weight.
        assert!(PolicyConfig::new(PolicyKind::Ucb1).with_xi(0.4).validate(&env).is_ok());
        let mut cfg = PolicyConfig::new(PolicyKind::UcbBv1);
        cfg.c_min = Some(0.0);
        assert!(matches!(cfg.validate(&env), Err(PolicyError::CMin { .. })));
        let zero_shift = stationary(&[(0.5, 2.0), (0.4, 2.0)], 0.0);
        assert!(PolicyConfig::new(PolicyKind::Kube).validate(&zero_shift).is_err());
    }

    #[test]
    fn config_toml_shape() {
        let cfg: PolicyConfig = toml::from_str("kind = \"BPRPC-SWUCB\"\nxi = 0.6\ntau = 2000\n").unwrap();
        assert_eq!(cfg, PolicyConfig::swucb(0.6, 2000));
        assert!(toml::from_str::<PolicyConfig>("kind = \"UCB1\"\nwindow = 3\n").is_err());
        assert!(toml::from_str::<PolicyConfig>("kind = \"Thompson\"\n").is_err());
    }
}
