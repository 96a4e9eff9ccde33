//! Arm-pulling interface over the two environment kinds: the physical
//! offloading model and the parametric Bernoulli / shifted-exponential model.
//!
//! Arms are indexed from 0 in the API. Config files and CSV outputs number
//! them from 1.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{self, ModelError, QoSThreshold, ServerModel};
use crate::schedule::{self, PiecewiseSchedule, Round};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("arm {arm} out of range for {arms} arms")]
    UnknownArm { arm: usize, arms: usize },
    #[error("an environment needs at least two arms, got {0}")]
    TooFewArms(usize),
    #[error("arm {arm}: mean reward {value} at round {round} outside [0, 1]")]
    RewardMean { arm: usize, round: Round, value: f64 },
    #[error("arm {arm}: mean cost {value} at round {round} must be positive and at least the shift {shift}")]
    CostMean {
        arm: usize,
        round: Round,
        value: f64,
        shift: f64,
    },
    #[error("arm {arm}: cost shift {shift} must be finite and non-negative")]
    Shift { arm: usize, shift: f64 },
    #[error("arm {arm}: {source}")]
    Model {
        arm: usize,
        #[source]
        source: ModelError,
    },
}

/// Arm with Bernoulli rewards and shifted-exponential costs, drawn
/// independently. A cost mean equal to the shift makes the cost deterministic. The exponential shape approximates the physical cost law,
/// whose density decays exponentially above the minimum cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricArm {
    pub reward_mean: PiecewiseSchedule,
    pub cost_mean: PiecewiseSchedule,
    /// Minimum cost `a' + a''`.
    pub shift: f64,
}

impl ParametricArm {
    fn validate(&self, arm: usize) -> Result<(), EnvError> {
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(EnvError::Shift {
                arm,
                shift: self.shift,
            });
        }
        for (round, value) in self.reward_mean.points() {
            if !(0.0..=1.0).contains(&value) {
                return Err(EnvError::RewardMean { arm, round, value });
            }
        }
        for (round, value) in self.cost_mean.points() {
            if !(value >= self.shift && value > 0.0) {
                return Err(EnvError::CostMean {
                    arm,
                    round,
                    value,
                    shift: self.shift,
                });
            }
        }
        Ok(())
    }
}

/// Physical server paired with the user's delay threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerArm {
    pub server: ServerModel,
    pub qos_threshold: QoSThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvironmentKind {
    Parametric,
    Generative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArmSet {
    Parametric { arms: Vec<ParametricArm> },
    Generative { arms: Vec<ServerArm> },
}

impl ArmSet {
    pub fn len(&self) -> usize {
        match self {
            ArmSet::Parametric { arms } => arms.len(),
            ArmSet::Generative { arms } => arms.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn schedules(&self) -> Vec<&PiecewiseSchedule> {
        match self {
            ArmSet::Parametric { arms } => arms
                .iter()
                .flat_map(|a| [&a.reward_mean, &a.cost_mean])
                .collect(),
            ArmSet::Generative { arms } => arms.iter().flat_map(|a| a.server.schedules()).collect(),
        }
    }
}

/// Reward and cost of one pull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub reward: f64,
    pub cost: f64,
}

/// Ground-truth means of every arm over one stationary segment.
#[derive(Debug, Clone, PartialEq)]
struct Segment {
    start: Round,
    means: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArmSet", into = "ArmSet")]
pub struct Environment {
    arms: ArmSet,
    segments: Vec<Segment>,
}

impl Environment {
    pub fn new(arms: ArmSet) -> Result<Self, EnvError> {
        if arms.len() < 2 {
            return Err(EnvError::TooFewArms(arms.len()));
        }
        if let ArmSet::Parametric { arms } = &arms {
            for (i, a) in arms.iter().enumerate() {
                a.validate(i)?;
            }
        }
        let starts = schedule::change_rounds(arms.schedules(), Round::MAX);
        let segments = starts
            .into_iter()
            .map(|start| Segment {
                start,
                means: (0..arms.len()).map(|i| exact_means(&arms, i, start)).collect(),
            })
            .collect();
        Ok(Self { arms, segments })
    }

    pub fn parametric(arms: Vec<ParametricArm>) -> Result<Self, EnvError> {
        Self::new(ArmSet::Parametric { arms })
    }

    pub fn generative(arms: Vec<ServerArm>) -> Result<Self, EnvError> {
        Self::new(ArmSet::Generative { arms })
    }

    pub fn kind(&self) -> EnvironmentKind {
        match self.arms {
            ArmSet::Parametric { .. } => EnvironmentKind::Parametric,
            ArmSet::Generative { .. } => EnvironmentKind::Generative,
        }
    }

    pub fn arms(&self) -> &ArmSet {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    /// Upper bound on a single reward.
    pub fn r_max(&self) -> f64 {
        1.0
    }

    /// Lower bound on a single cost.
    pub fn c_min(&self) -> f64 {
        match &self.arms {
            ArmSet::Parametric { arms } => arms.iter().map(|a| a.shift).fold(f64::INFINITY, f64::min),
            ArmSet::Generative { arms } => arms
                .iter()
                .map(|a| a.server.energy().min_cost())
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn check_arm(&self, arm: usize) -> Result<(), EnvError> {
        if arm < self.num_arms() {
            Ok(())
        } else {
            Err(EnvError::UnknownArm {
                arm,
                arms: self.num_arms(),
            })
        }
    }

    pub fn pull<R: Rng + ?Sized>(
        &self,
        arm: usize,
        round: Round,
        rng: &mut R,
    ) -> Result<Observation, EnvError> {
        self.check_arm(arm)?;
        Ok(match &self.arms {
            ArmSet::Parametric { arms } => {
                let a = &arms[arm];
                let mu = a.reward_mean.value_at(round);
                let excess = a.cost_mean.value_at(round) - a.shift;
                let reward = Bernoulli::new(mu).expect("validated mean").sample(rng);
                let cost = if excess > 0.0 {
                    a.shift + Exp::new(1.0 / excess).expect("validated mean").sample(rng)
                } else {
                    a.shift
                };
                Observation {
                    reward: if reward { 1.0 } else { 0.0 },
                    cost,
                }
            }
            ArmSet::Generative { arms } => {
                let a = &arms[arm];
                let o = netmodel::sample_pull(&a.server, a.qos_threshold, round, rng);
                Observation {
                    reward: o.reward,
                    cost: o.cost,
                }
            }
        })
    }

    fn segment(&self, round: Round) -> &Segment {
        let idx = self.segments.partition_point(|s| s.start <= round);
        &self.segments[idx - 1]
    }

    /// `(μ, η)` of `arm` at `round`.
    pub fn oracle_means(&self, arm: usize, round: Round) -> Result<(f64, f64), EnvError> {
        self.check_arm(arm)?;
        Ok(self.segment(round).means[arm])
    }

    /// `(μ, η)` of every arm at `round`.
    pub fn means_at(&self, round: Round) -> &[(f64, f64)] {
        &self.segment(round).means
    }

    /// Arm maximising `μ/η` at `round`; lowest index on ties.
    pub fn best_arm(&self, round: Round) -> usize {
        argmax(self.means_at(round).iter().map(|(mu, eta)| mu / eta))
    }

    /// Rounds at which any arm's law changes, starting with round 1.
    pub fn change_rounds(&self, horizon: Round) -> Vec<Round> {
        self.segments
            .iter()
            .map(|s| s.start)
            .take_while(|&s| s <= horizon)
            .collect()
    }

    /// Number of change points up to `horizon`, counting round 1.
    pub fn change_points_before(&self, horizon: Round) -> usize {
        schedule::change_points_before(self.arms.schedules(), horizon)
    }
}

fn exact_means(arms: &ArmSet, arm: usize, round: Round) -> (f64, f64) {
    match arms {
        ArmSet::Parametric { arms } => (
            arms[arm].reward_mean.value_at(round),
            arms[arm].cost_mean.value_at(round),
        ),
        ArmSet::Generative { arms } => {
            let a = &arms[arm];
            (
                netmodel::reward_mean(&a.server, a.qos_threshold, round),
                netmodel::expected_cost(&a.server, round),
            )
        }
    }
}

impl TryFrom<ArmSet> for Environment {
    type Error = EnvError;
    fn try_from(arms: ArmSet) -> Result<Self, Self::Error> {
        Self::new(arms)
    }
}

impl From<Environment> for ArmSet {
    fn from(env: Environment) -> Self {
        env.arms
    }
}

/// Index of the largest value, first index on ties. `+∞` beats every finite
/// value.
pub fn argmax<I: IntoIterator<Item = f64>>(values: I) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn sched(points: &[(Round, f64)]) -> PiecewiseSchedule {
        PiecewiseSchedule::new(points.to_vec()).unwrap()
    }

    /// The three-server change-point scenario with unit cost shift.
    pub fn table2() -> Environment {
        let arm = |mu: &[(Round, f64)], eta: &[(Round, f64)]| ParametricArm {
            reward_mean: sched(mu),
            cost_mean: sched(eta),
            shift: 1.0,
        };
        Environment::parametric(vec![
            arm(
                &[(1, 0.5), (500, 0.1), (1000, 0.2), (2000, 0.8), (4000, 0.2)],
                &[(1, 1.1), (500, 1.8), (2000, 1.2), (4000, 1.5)],
            ),
            arm(
                &[(1, 0.4), (1000, 0.9), (2000, 0.1), (4000, 0.2), (8000, 0.8)],
                &[(1, 1.2), (500, 1.9), (1000, 1.1), (2000, 1.2), (4000, 1.9), (8000, 1.1)],
            ),
            arm(
                &[(1, 0.3), (500, 0.8), (1000, 0.3), (4000, 0.9), (8000, 0.1)],
                &[(1, 1.4), (500, 1.1), (1000, 1.9), (4000, 1.1), (8000, 1.6)],
            ),
        ])
        .unwrap()
    }

    pub fn stationary(means: &[(f64, f64)], shift: f64) -> Environment {
        Environment::parametric(
            means
                .iter()
                .map(|&(mu, eta)| ParametricArm {
                    reward_mean: PiecewiseSchedule::constant(mu),
                    cost_mean: PiecewiseSchedule::constant(eta),
                    shift,
                })
                .collect(),
        )
        .unwrap()
    }
}
