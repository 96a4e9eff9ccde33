//! Stationary comparison policies working on full-history statistics.

use rand::{Rng, RngCore};

use super::window::HistoryStats;
use super::Policy;
use crate::environment::{argmax, Observation};
use crate::schedule::Round;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexRule {
    /// `(r̄ + sqrt(2 ln θ / N)) / c̄`
    Kube,
    /// Mean per-pull ratio plus `r_max sqrt(ξ' ln θ / N)`.
    Ucb1 { xi: f64 },
    /// `r̄/c̄ + (r_max / c_min) sqrt(ξ'' ln θ / N)`
    UcbBased { xi: f64 },
    /// `r̄/c̄ + (1 + 1/c_min) z / (c_min − z)` with `z = sqrt(ln(θ−1) / N)`.
    UcbBv1,
}

pub fn baseline_index(
    rule: IndexRule,
    stats: &HistoryStats,
    round: Round,
    arm: usize,
    r_max: f64,
    c_min: f64,
) -> f64 {
    let Some((r, c)) = stats.means(arm) else {
        return f64::INFINITY;
    };
    let n = stats.count(arm) as f64;
    let log_round = (round as f64).ln();
    match rule {
        IndexRule::Kube => (r + (2.0 * log_round / n).sqrt()) / c,
        IndexRule::Ucb1 { xi } => {
            stats.mean_ratio(arm).expect("arm has pulls") + r_max * (xi * log_round / n).sqrt()
        }
        IndexRule::UcbBased { xi } => r / c + (r_max / c_min) * (xi * log_round / n).sqrt(),
        IndexRule::UcbBv1 => {
            let z = ((round.saturating_sub(1).max(1) as f64).ln() / n).sqrt();
            let denom = c_min - z;
            if denom <= 0.0 {
                f64::INFINITY
            } else {
                r / c + (1.0 + 1.0 / c_min) * z / denom
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct IndexPolicy {
    rule: IndexRule,
    stats: HistoryStats,
    r_max: f64,
    c_min: f64,
}

impl IndexPolicy {
    pub fn new(arms: usize, rule: IndexRule, r_max: f64, c_min: f64) -> Self {
        Self {
            rule,
            stats: HistoryStats::new(arms),
            r_max,
            c_min,
        }
    }

    pub fn indices(&self, round: Round) -> Vec<f64> {
        (0..self.stats.num_arms())
            .map(|a| baseline_index(self.rule, &self.stats, round, a, self.r_max, self.c_min))
            .collect()
    }
}

impl Policy for IndexPolicy {
    fn select(&mut self, round: Round, _rng: &mut dyn RngCore) -> usize {
        argmax(self.indices(round))
    }

    fn observe(&mut self, _round: Round, arm: usize, obs: Observation) {
        self.stats.push(arm, obs.reward, obs.cost);
    }
}

/// Explores uniformly with probability `1/θ`, otherwise plays the arm with
/// the best empirical reward-to-cost ratio.
#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    stats: HistoryStats,
}

impl EpsilonGreedy {
    pub fn new(arms: usize) -> Self {
        Self {
            stats: HistoryStats::new(arms),
        }
    }

    pub fn exploration_probability(round: Round) -> f64 {
        1.0 / round as f64
    }

    fn greedy_arm(&self) -> usize {
        argmax((0..self.stats.num_arms()).map(|a| match self.stats.means(a) {
            Some((r, c)) => r / c,
            None => f64::INFINITY,
        }))
    }
}

impl Policy for EpsilonGreedy {
    fn select(&mut self, round: Round, rng: &mut dyn RngCore) -> usize {
        if rng.random::<f64>() < Self::exploration_probability(round) {
            rng.random_range(0..self.stats.num_arms())
        } else {
            self.greedy_arm()
        }
    }

    fn observe(&mut self, _round: Round, arm: usize, obs: Observation) {
        self.stats.push(arm, obs.reward, obs.cost);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Round: arm, r, c
    //   1: 0, 1, 1.2   2: 1, 0, 1.5   3: 0, 0, 1.1
    //   4: 1, 1, 1.4   5: 0, 1, 1.6   6: 1, 1, 1.9
    // At θ = 7 with r_max = c_min = 1 and ξ' = ξ'' = 0.6:
    //   arm 0: N=3, r̄=2/3, c̄=3.9/3, mean r/c = (1/1.2 + 1/1.6)/3
    //   arm 1: N=3, r̄=2/3, c̄=4.8/3, mean r/c = (1/1.4 + 1/1.9)/3
    const HISTORY: [(usize, f64, f64); 6] = [
        (0, 1.0, 1.2),
        (1, 0.0, 1.5),
        (0, 0.0, 1.1),
        (1, 1.0, 1.4),
        (0, 1.0, 1.6),
        (1, 1.0, 1.9),
    ];
    const EXPECTED: [(IndexRule, [f64; 2]); 4] = [
        (IndexRule::Kube, [1.388_958_296_391_631_6, 1.128_528_615_818_200_6]),
        (IndexRule::Ucb1 { xi: 0.6 }, [1.109_955_666_918_936_3, 1.037_378_390_394_291_2]),
        (IndexRule::UcbBased { xi: 0.6 }, [1.136_665_068_628_338, 1.040_511_222_474_492]),
        (IndexRule::UcbBv1, [7.316_472_650_932_117, 7.220_318_804_778_271]),
    ];

    fn stats() -> HistoryStats {
        let mut s = HistoryStats::new(2);
        for &(a, r, c) in &HISTORY {
            s.push(a, r, c);
        }
        s
    }

    #[test]
    fn index_formulas_match_hand_trace() {
        let s = stats();
        for (rule, want) in EXPECTED {
            for arm in 0..2 {
                let got = baseline_index(rule, &s, 7, arm, 1.0, 1.0);
                assert_relative_eq!(got, want[arm], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn ucb_bv1_at_second_round() {
        let mut s = HistoryStats::new(2);
        s.push(0, 1.0, 2.0);
        assert_eq!(baseline_index(IndexRule::UcbBv1, &s, 2, 0, 1.0, 1.0), 0.5);
        // z ≥ c_min gives an infinite index
        assert_eq!(baseline_index(IndexRule::UcbBv1, &s, 100, 0, 1.0, 1.0), f64::INFINITY);
    }

    #[test]
    fn unplayed_arm_is_infinite() {
        let s = HistoryStats::new(2);
        for (rule, _) in EXPECTED {
            assert_eq!(baseline_index(rule, &s, 3, 1, 1.0, 1.0), f64::INFINITY);
        }
    }

    #[test]
    fn epsilon_schedule() {
        assert_eq!(EpsilonGreedy::exploration_probability(10), 0.1);
        assert_eq!(EpsilonGreedy::exploration_probability(1), 1.0);

        // Arm 1 is greedy; at θ = 10 the other arm appears only through the
        // uniform draw, i.e. with probability ε/2 = 0.05.
        let mut p = EpsilonGreedy::new(2);
        p.observe(1, 0, Observation { reward: 0.0, cost: 1.0 });
        p.observe(2, 1, Observation { reward: 1.0, cost: 1.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 400_000;
        let off = (0..n).filter(|_| p.select(10, &mut rng) == 0).count();
        assert!((off as f64 / n as f64 - 0.05).abs() < 0.002);
    }
}
