//! Closed-form laws of hops, transmission time, reward and cost.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use super::{GeometryParams, ModelError, QoSThreshold, QueueParams, ServerModel};
use crate::schedule::Round;

/// Tail mass below which infinite series over the transmission time are cut.
pub const TAIL_EPSILON: f64 = 1e-12;

/// Lens area shared by two discs of radius `range` whose centres are
/// `distance` apart.
pub fn intersection_area(range: f64, distance: f64) -> Result<f64, ModelError> {
    if !(range > 0.0) {
        return Err(ModelError::NonPositiveRange(range));
    }
    if !(distance >= 0.0 && distance <= 2.0 * range) {
        return Err(ModelError::DistanceOutOfRange { distance, range });
    }
    let half_angle = (distance / (2.0 * range)).clamp(-1.0, 1.0).acos();
    Ok(range * range * (2.0 * half_angle - (2.0 * half_angle).sin()))
}

/// `exponent * ln(base)`, with `0 * ln(0) = 0`.
fn ln_pow(base: f64, exponent: u64) -> f64 {
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * base.ln()
    }
}

/// Probability that exactly `k` Bernoulli(p) trials are needed for the
/// `h`-th success.
fn negative_binomial(k: u64, h: u64, p: f64) -> f64 {
    if k < h || h == 0 {
        return 0.0;
    }
    let ln = ln_binomial(k - 1, h - 1) + ln_pow(p, h) + ln_pow(1.0 - p, k - h);
    ln.exp()
}

/// Truncated geometric law of the hop count, `P(H = h) ∝ q^{h-1}` on
/// `1..=h_max` with `q = 1 − exp(−Λ|A|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopLaw {
    q: f64,
    pmf: Vec<f64>,
}

impl HopLaw {
    pub fn new(geometry: &GeometryParams) -> Result<Self, ModelError> {
        geometry.validate()?;
        let area = intersection_area(geometry.range, geometry.distance)?;
        let q = -(-geometry.intensity * area).exp_m1();
        let mut weights = Vec::with_capacity(geometry.max_hops as usize);
        let mut w = 1.0;
        for _ in 0..geometry.max_hops {
            weights.push(w);
            w *= q;
        }
        let total: f64 = weights.iter().sum();
        let pmf = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { q, pmf })
    }

    /// Connection parameter `q = 1 − exp(−Λ|A|)`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Normalising constant C_ℓ.
    pub fn normalization(&self) -> f64 {
        self.pmf[0]
    }

    /// `pmf()[h - 1] = P(H = h)`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn max_hops(&self) -> u64 {
        self.pmf.len() as u64
    }

    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }
}

/// Law of the total transmission time `g` (slots) for a fixed success
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionLaw {
    hops: HopLaw,
    p: f64,
}

impl TransmissionLaw {
    pub fn new(hops: HopLaw, p: f64) -> Self {
        Self { hops, p }
    }

    pub fn success_prob(&self) -> f64 {
        self.p
    }

    pub fn hops(&self) -> &HopLaw {
        &self.hops
    }

    /// `P(g = k)`; zero for `k = 0`.
    pub fn pmf(&self, k: u64) -> f64 {
        let top = k.min(self.hops.max_hops());
        (1..=top)
            .map(|h| self.hops.pmf[h as usize - 1] * negative_binomial(k, h, self.p))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.hops.mean() / self.p
    }

    /// Upper bound on `P(g > k)`: the transmission time is stochastically
    /// dominated by a negative binomial with `h_max` successes, whose tail
    /// equals `P(Binomial(k, p) < h_max)`.
    pub fn tail_bound(&self, k: u64) -> f64 {
        let h_max = self.hops.max_hops();
        if k < h_max {
            return 1.0;
        }
        (0..h_max)
            .map(|j| (ln_binomial(k, j) + ln_pow(self.p, j) + ln_pow(1.0 - self.p, k - j)).exp())
            .sum::<f64>()
            .min(1.0)
    }

    /// Smallest `k` with `tail_bound(k) < eps`.
    pub fn support_cutoff(&self, eps: f64) -> u64 {
        let mut hi = self.hops.max_hops().max(1);
        while self.tail_bound(hi) >= eps {
            hi *= 2;
        }
        let mut lo = hi / 2;
        // tail_bound is nonincreasing in k
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if self.tail_bound(mid) < eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `P(g = k)` for `k = 1..=support_cutoff(TAIL_EPSILON)`, index `k - 1`.
    pub fn table(&self) -> Vec<f64> {
        let cutoff = self.support_cutoff(TAIL_EPSILON);
        (1..=cutoff).map(|k| self.pmf(k)).collect()
    }
}

pub fn hop_pmf(geometry: &GeometryParams) -> Result<Vec<f64>, ModelError> {
    Ok(HopLaw::new(geometry)?.pmf)
}

pub fn expected_hops(geometry: &GeometryParams) -> Result<f64, ModelError> {
    Ok(HopLaw::new(geometry)?.mean())
}

pub fn transmission_pmf(geometry: &GeometryParams, p: f64, k: u64) -> Result<f64, ModelError> {
    Ok(TransmissionLaw::new(HopLaw::new(geometry)?, p).pmf(k))
}

pub fn expected_transmission_time(geometry: &GeometryParams, p: f64) -> Result<f64, ModelError> {
    Ok(expected_hops(geometry)? / p)
}

/// CDF of the processing (sojourn) time at `round`.
pub fn processing_cdf(queue: &QueueParams, round: Round, x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else {
        -(-queue.processing_rate(round) * x).exp_m1()
    }
}

/// Success probability of the QoS reward, `P(f + g ≤ δ)`.
pub fn reward_mean(server: &ServerModel, qos: QoSThreshold, round: Round) -> f64 {
    let delta = qos.get();
    let rate = server.processing_rate(round);
    let law = server.transmission_law(round);
    let last = delta.floor() as u64;
    (1..=last)
        .map(|k| -(-rate * (delta - k as f64)).exp_m1() * law.pmf(k))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Transmission-time contributions that can be nonzero at cost `x`:
/// `k = 1..=⌊(x − a'')/a'⌋`, capped at the series cutoff.
fn cost_terms(server: &ServerModel, x: f64) -> u64 {
    let e = server.energy();
    ((x - e.a_double_prime) / e.a_prime).floor().max(0.0) as u64
}

/// Density of the energy cost at `round`.
pub fn cost_pdf(server: &ServerModel, round: Round, x: f64) -> f64 {
    let e = server.energy();
    if x < e.min_cost() {
        return 0.0;
    }
    let rate = server.processing_rate(round);
    let law = server.transmission_law(round);
    let last = cost_terms(server, x).min(law.support_cutoff(TAIL_EPSILON));
    (1..=last)
        .map(|k| {
            let t = (x - e.a_double_prime - e.a_prime * k as f64) / e.a;
            rate * (-rate * t).exp() * law.pmf(k)
        })
        .sum::<f64>()
        / e.a
}

/// Distribution function of the energy cost at `round`.
pub fn cost_cdf(server: &ServerModel, round: Round, x: f64) -> f64 {
    let e = server.energy();
    if x < e.min_cost() {
        return 0.0;
    }
    let rate = server.processing_rate(round);
    let law = server.transmission_law(round);
    let last = cost_terms(server, x).min(law.support_cutoff(TAIL_EPSILON));
    (1..=last)
        .map(|k| {
            let t = (x - e.a_double_prime - e.a_prime * k as f64) / e.a;
            -(-rate * t).exp_m1() * law.pmf(k)
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

pub fn expected_cost(server: &ServerModel, round: Round) -> f64 {
    let e = server.energy();
    let p = server.success_prob(round);
    e.a / server.processing_rate(round) + e.a_prime * server.hop_law().mean() / p + e.a_double_prime
}
