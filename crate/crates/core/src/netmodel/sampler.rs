use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric};

use super::{QoSThreshold, ServerModel};
use crate::schedule::Round;

/// One offloading round drawn from the physical model. Reward and cost share
/// the same `(f, g)` draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullOutcome {
    pub hops: u32,
    /// Slots spent on the radio path (sum of per-hop attempts).
    pub transmission_time: u64,
    pub processing_time: f64,
    pub delay: f64,
    pub reward: f64,
    pub cost: f64,
}

pub fn sample_pull<R: Rng + ?Sized>(
    server: &ServerModel,
    qos: QoSThreshold,
    round: Round,
    rng: &mut R,
) -> PullOutcome {
    let hop_pmf = server.hop_law().pmf();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut hops = hop_pmf.len() as u32;
    for (i, p) in hop_pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            hops = i as u32 + 1;
            break;
        }
    }

    // Geometric counts failures before the first success.
    let attempts = Geometric::new(server.success_prob(round)).expect("validated probability");
    let transmission_time: u64 = (0..hops).map(|_| attempts.sample(rng) + 1).sum();

    let processing = Exp::new(server.processing_rate(round)).expect("validated stable queue");
    let processing_time = processing.sample(rng);

    let delay = processing_time + transmission_time as f64;
    let reward = if delay <= qos.get() { 1.0 } else { 0.0 };
    let cost = server.energy().cost(processing_time, transmission_time);
    PullOutcome {
        hops,
        transmission_time,
        processing_time,
        delay,
        reward,
        cost,
    }
}
