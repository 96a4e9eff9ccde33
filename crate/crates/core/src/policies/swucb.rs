//! Sliding-window UCB on the reward-to-cost ratio for budgets under
//! piece-wise stationary rewards and costs.

use rand::RngCore;

use super::window::WindowStats;
use super::Policy;
use crate::environment::{argmax, Observation};
use crate::schedule::Round;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwucbParams {
    /// Exploration weight ξ.
    pub xi: f64,
    /// Window length τ.
    pub tau: usize,
    pub r_max: f64,
    pub c_min: f64,
}

/// Exploration padding `E_θ(τ, i)` for an arm seen `count` times in the
/// window. Infinite once the confidence radius reaches `c_min`.
pub fn swucb_padding(params: &SwucbParams, round: Round, count: usize) -> f64 {
    debug_assert!(count >= 1 && round >= 1);
    let horizon = round.min(params.tau as Round) as f64;
    let radius = params.r_max * (params.xi * horizon.ln() / count as f64).sqrt();
    let denom = params.c_min - radius;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        (1.0 + params.r_max / params.c_min) * radius / denom
    }
}

/// `r̄/c̄ + E` over the window; `+∞` for an arm that has left the window.
pub fn swucb_index(stats: &WindowStats, params: &SwucbParams, arm: usize, round: Round) -> f64 {
    match stats.means(arm) {
        None => f64::INFINITY,
        Some((r, c)) => r / c + swucb_padding(params, round, stats.count(arm)),
    }
}

#[derive(Debug, Clone)]
pub struct SlidingWindowUcb {
    params: SwucbParams,
    stats: WindowStats,
}

impl SlidingWindowUcb {
    pub fn new(arms: usize, params: SwucbParams) -> Self {
        Self {
            stats: WindowStats::new(arms, params.tau),
            params,
        }
    }

    pub fn stats(&self) -> &WindowStats {
        &self.stats
    }

    pub fn indices(&self, round: Round) -> Vec<f64> {
        (0..self.stats.num_arms())
            .map(|a| swucb_index(&self.stats, &self.params, a, round))
            .collect()
    }
}

impl Policy for SlidingWindowUcb {
    fn select(&mut self, round: Round, _rng: &mut dyn RngCore) -> usize {
        argmax(self.indices(round))
    }

    fn observe(&mut self, _round: Round, arm: usize, obs: Observation) {
        self.stats.push(arm, obs.reward, obs.cost);
    }
}
