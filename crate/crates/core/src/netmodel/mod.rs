//! Physical offloading model: multi-hop transmission over a Poisson relay
//! field with Bernoulli link outages, M/M/1 processing at the server, and a
//! linear energy cost.
//!
//! A round's outcome is generated as
//!
//! ```text
//! H ~ truncated geometric hop law         (relay field)
//! g = K_1 + ... + K_H,  K_i ~ Geom(p_θ)   (attempts per hop, support {1, 2, ..})
//! f ~ Exp(ρ - λ_θ)                        (sojourn time in the queue)
//! d = f + g,  r = 1{d ≤ δ},  c = a f + a' g + a''
//! ```
//!
//! Time slots are unit length, so `g` is an integer number of attempts and
//! `f`, `δ` are measured in the same unit.

mod analytic;
mod sampler;

pub use analytic::{
    cost_cdf, cost_pdf, expected_cost, expected_hops, expected_transmission_time, hop_pmf,
    intersection_area, processing_cdf, reward_mean, transmission_pmf, HopLaw, TransmissionLaw,
    TAIL_EPSILON,
};
pub use sampler::{sample_pull, PullOutcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{PiecewiseSchedule, Round};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("transmission range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("distance {distance} outside [0, 2R] for range R = {range}")]
    DistanceOutOfRange { distance: f64, range: f64 },
    #[error("relay intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),
    #[error("maximum hop count must be at least 1")]
    ZeroMaxHops,
    #[error("queue unstable: service rate {service_rate} must exceed arrival rate {arrival_rate} (round {round})")]
    Unstable {
        round: Round,
        service_rate: f64,
        arrival_rate: f64,
    },
    #[error("arrival rate {arrival_rate} at round {round} is negative")]
    NegativeArrival { round: Round, arrival_rate: f64 },
    #[error("link success probability {value} at round {round} is outside (0, 1]")]
    SuccessProbability { round: Round, value: f64 },
    #[error("energy coefficients invalid: {0}")]
    Energy(&'static str),
    #[error("QoS threshold must be positive, got {0}")]
    QoS(f64),
}

/// Relay-field geometry between the user and one server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    /// Relay intensity Λ (nodes per unit area).
    pub intensity: f64,
    /// Transmission range R.
    pub range: f64,
    /// Source-to-server distance ℓ.
    pub distance: f64,
    pub max_hops: u32,
}

impl GeometryParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.range > 0.0) {
            return Err(ModelError::NonPositiveRange(self.range));
        }
        if !(self.distance >= 0.0 && self.distance <= 2.0 * self.range) {
            return Err(ModelError::DistanceOutOfRange {
                distance: self.distance,
                range: self.range,
            });
        }
        if !(self.intensity > 0.0) {
            return Err(ModelError::NonPositiveIntensity(self.intensity));
        }
        if self.max_hops == 0 {
            return Err(ModelError::ZeroMaxHops);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueParams {
    /// Service rate ρ.
    pub service_rate: f64,
    /// Job arrival rate λ_θ.
    pub arrival_rate: PiecewiseSchedule,
}

impl QueueParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (round, lambda) in self.arrival_rate.points() {
            if lambda < 0.0 {
                return Err(ModelError::NegativeArrival {
                    round,
                    arrival_rate: lambda,
                });
            }
            if !(self.service_rate > lambda) {
                return Err(ModelError::Unstable {
                    round,
                    service_rate: self.service_rate,
                    arrival_rate: lambda,
                });
            }
        }
        Ok(())
    }

    /// Rate ρ − λ_θ of the exponential sojourn time.
    pub fn processing_rate(&self, round: Round) -> f64 {
        self.service_rate - self.arrival_rate.value_at(round)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Per-attempt success probability p_θ.
    pub success_prob: PiecewiseSchedule,
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (round, value) in self.success_prob.points() {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ModelError::SuccessProbability { round, value });
            }
        }
        Ok(())
    }
}

/// Linear energy model `c = a f + a' g + a''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCoeffs {
    /// Energy per unit of processing time.
    pub a: f64,
    /// Energy per transmission slot.
    pub a_prime: f64,
    /// Fixed energy per round.
    pub a_double_prime: f64,
}

impl EnergyCoeffs {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.a > 0.0) {
            return Err(ModelError::Energy("a must be positive"));
        }
        if !(self.a_prime > 0.0) {
            return Err(ModelError::Energy("a' must be positive"));
        }
        if !(self.a_double_prime >= 0.0) {
            return Err(ModelError::Energy("a'' must be non-negative"));
        }
        Ok(())
    }

    /// Smallest possible cost: one slot, zero processing time.
    pub fn min_cost(&self) -> f64 {
        self.a_prime + self.a_double_prime
    }

    pub fn cost(&self, processing_time: f64, transmission_time: u64) -> f64 {
        self.a * processing_time + self.a_prime * transmission_time as f64 + self.a_double_prime
    }
}

/// Delay threshold δ for the QoS reward.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QoSThreshold(f64);

impl QoSThreshold {
    pub fn new(delta: f64) -> Result<Self, ModelError> {
        if delta > 0.0 && delta.is_finite() {
            Ok(Self(delta))
        } else {
            Err(ModelError::QoS(delta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QoSThreshold {
    type Error = ModelError;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<QoSThreshold> for f64 {
    fn from(q: QoSThreshold) -> f64 {
        q.0
    }
}

/// Raw component description of a server, as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerSpec {
    pub geometry: GeometryParams,
    pub queue: QueueParams,
    pub link: LinkParams,
    pub energy: EnergyCoeffs,
}

/// A validated server with its hop law precomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ServerSpec", into = "ServerSpec")]
pub struct ServerModel {
    spec: ServerSpec,
    hops: HopLaw,
}

impl ServerModel {
    pub fn new(spec: ServerSpec) -> Result<Self, ModelError> {
        spec.queue.validate()?;
        spec.link.validate()?;
        spec.energy.validate()?;
        let hops = HopLaw::new(&spec.geometry)?;
        Ok(Self { spec, hops })
    }

    pub fn geometry(&self) -> &GeometryParams {
        &self.spec.geometry
    }

    pub fn queue(&self) -> &QueueParams {
        &self.spec.queue
    }

    pub fn link(&self) -> &LinkParams {
        &self.spec.link
    }

    pub fn energy(&self) -> &EnergyCoeffs {
        &self.spec.energy
    }

    pub fn hop_law(&self) -> &HopLaw {
        &self.hops
    }

    pub fn spec(&self) -> &ServerSpec {
        &self.spec
    }

    pub fn success_prob(&self, round: Round) -> f64 {
        self.spec.link.success_prob.value_at(round)
    }

    pub fn processing_rate(&self, round: Round) -> f64 {
        self.spec.queue.processing_rate(round)
    }

    /// Transmission-time law in force at `round`.
    pub fn transmission_law(&self, round: Round) -> TransmissionLaw {
        TransmissionLaw::new(self.hops.clone(), self.success_prob(round))
    }

    /// Schedules whose changes alter this server's reward or cost law.
    pub fn schedules(&self) -> [&PiecewiseSchedule; 2] {
        [&self.spec.queue.arrival_rate, &self.spec.link.success_prob]
    }
}

impl TryFrom<ServerSpec> for ServerModel {
    type Error = ModelError;
    fn try_from(spec: ServerSpec) -> Result<Self, Self::Error> {
        Self::new(spec)
    }
}

impl From<ServerModel> for ServerSpec {
    fn from(m: ServerModel) -> Self {
        m.spec
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_the_violation() {
        let mut spec = fixtures::reference_server().spec().clone();
        spec.queue.arrival_rate = PiecewiseSchedule::new(vec![(1, 1.0), (50, 2.5)]).unwrap();
        assert!(matches!(
            ServerModel::new(spec.clone()),
            Err(ModelError::Unstable { round: 50, .. })
        ));

        spec = fixtures::reference_server().spec().clone();
        spec.link.success_prob = PiecewiseSchedule::constant(0.0);
        assert!(matches!(
            ServerModel::new(spec.clone()),
            Err(ModelError::SuccessProbability { .. })
        ));

        spec = fixtures::reference_server().spec().clone();
        spec.geometry.distance = 2.5;
        assert!(matches!(
            ServerModel::new(spec.clone()),
            Err(ModelError::DistanceOutOfRange { .. })
        ));

        spec = fixtures::reference_server().spec().clone();
        spec.energy.a_prime = 0.0;
        assert!(matches!(ServerModel::new(spec), Err(ModelError::Energy(_))));

        assert!(QoSThreshold::new(0.0).is_err());
    }
}
