//! Closed-form evaluators for suboptimality gaps, the oracle reward cap and
//! the regret bound of the sliding-window policy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::Environment;
use crate::schedule::Round;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("arm {arm} is optimal at every round up to {horizon}; its gap is undefined")]
    AlwaysOptimal { arm: usize, horizon: Round },
    #[error("arm {arm} out of range for {arms} arms")]
    UnknownArm { arm: usize, arms: usize },
    #[error("exploration weight xi = {0} must exceed 1/2")]
    Xi(f64),
    #[error("window length tau = {0} must be at least 2")]
    Tau(usize),
    #[error("budget must be positive, got {0}")]
    Budget(f64),
    #[error("need 0 < c_min <= c_max and r_max > 0, got c_min = {c_min}, c_max = {c_max}, r_max = {r_max}")]
    Bounds { r_max: f64, c_min: f64, c_max: f64 },
    #[error("gap of arm {arm} must be positive, got {gap}")]
    Gap { arm: usize, gap: f64 },
}

/// `Δ(i)`: the smallest utility shortfall of `arm` over rounds `≤ horizon`
/// at which it is not the oracle's choice.
pub fn gap(env: &Environment, arm: usize, horizon: Round) -> Result<f64, BoundError> {
    if arm >= env.num_arms() {
        return Err(BoundError::UnknownArm {
            arm,
            arms: env.num_arms(),
        });
    }
    env.change_rounds(horizon)
        .into_iter()
        .filter(|&round| env.best_arm(round) != arm)
        .map(|round| {
            let means = env.means_at(round);
            let ratio = |i: usize| means[i].0 / means[i].1;
            ratio(env.best_arm(round)) - ratio(arm)
        })
        .reduce(f64::min)
        .ok_or(BoundError::AlwaysOptimal { arm, horizon })
}

/// Cap on the oracle's cumulative reward: `(B + c_min) r_max / c_min`.
pub fn lemma1_cap(budget: f64, r_max: f64, c_min: f64) -> f64 {
    (budget + c_min) * r_max / c_min
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub budget: f64,
    pub r_max: f64,
    pub c_min: f64,
    /// `f64::INFINITY` when single-pull costs are unbounded.
    pub c_max: f64,
    pub xi: f64,
    pub tau: usize,
    /// `Υ`, change points up to the horizon, counting round 1.
    pub change_points: usize,
    /// `Δ(i)` per arm; `None` for an arm that is never suboptimal.
    pub gaps: Vec<Option<f64>>,
}

impl BoundInputs {
    /// Inputs for `env` with `Υ` and the gaps evaluated at horizon `B/c_min`.
    pub fn from_env(env: &Environment, budget: f64, xi: f64, tau: usize, c_max: f64) -> Self {
        let c_min = env.c_min();
        let horizon = (budget / c_min).ceil().max(1.0) as Round;
        Self {
            budget,
            r_max: env.r_max(),
            c_min,
            c_max,
            xi,
            tau,
            change_points: env.change_points_before(horizon),
            gaps: (0..env.num_arms()).map(|i| gap(env, i, horizon).ok()).collect(),
        }
    }

    pub fn arms(&self) -> usize {
        self.gaps.len()
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        if !(self.xi > 0.5) {
            return Err(BoundError::Xi(self.xi));
        }
        if self.tau < 2 {
            return Err(BoundError::Tau(self.tau));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(BoundError::Budget(self.budget));
        }
        if !(self.r_max > 0.0 && self.c_min > 0.0 && self.c_min <= self.c_max) {
            return Err(BoundError::Bounds {
                r_max: self.r_max,
                c_min: self.c_min,
                c_max: self.c_max,
            });
        }
        for (arm, g) in self.gaps.iter().enumerate() {
            if let Some(gap) = *g {
                if !(gap > 0.0) {
                    return Err(BoundError::Gap { arm, gap });
                }
            }
        }
        Ok(())
    }

    /// `C(τ, i)` with the horizon replaced by `B/c_min`.
    pub fn c_term(&self, gap: f64) -> f64 {
        let (r, c, xi) = (self.r_max, self.c_min, self.xi);
        let tau = self.tau as f64;
        let ln_tau = tau.ln();
        let blocks = self.budget / (c * tau);
        let lead = ((2.0 * (1.0 + r / c) + gap) / (c * gap)).powi(2) * r * r * xi * blocks.ceil() / blocks;
        let nu = 1.0 + 4.0 * (1.0 - 1.0 / (2.0 * xi)).sqrt();
        lead + 4.0 / ln_tau * (ln_tau / nu.ln()).ceil()
    }
}

/// Upper bound on the expected regret of the sliding-window policy.
///
/// An arm without a gap is never played suboptimally, so its `C(τ, i)` term
/// is dropped; its change-point and `log² τ` terms are kept.
pub fn theorem1_bound(inputs: &BoundInputs) -> Result<f64, BoundError> {
    inputs.validate()?;
    let b_over_c = inputs.budget / inputs.c_min;
    let tau = inputs.tau as f64;
    let ln_tau = tau.ln();
    let first = b_over_c * (1.0 - inputs.c_min / inputs.c_max) + 1.0;
    let per_arm: f64 = inputs
        .gaps
        .iter()
        .map(|g| {
            let c = g.map_or(0.0, |gap| inputs.c_term(gap) * b_over_c * ln_tau / tau);
            c + tau * inputs.change_points as f64 + 2.0 * ln_tau * ln_tau
        })
        .sum();
    Ok(inputs.r_max * (first + per_arm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::fixtures::{stationary, table2};
    use approx::assert_relative_eq;

    #[test]
    fn gap_stationary() {
        let env = stationary(&[(0.5, 1.0), (0.4, 1.0)], 0.5);
        assert_relative_eq!(gap(&env, 1, 100).unwrap(), 0.1, epsilon = 1e-15);
        assert_eq!(
            gap(&env, 0, 100),
            Err(BoundError::AlwaysOptimal { arm: 0, horizon: 100 })
        );
        assert!(matches!(gap(&env, 2, 100), Err(BoundError::UnknownArm { .. })));
    }

    #[test]
    fn gap_matches_round_by_round_scan() {
        let env = table2();
        for arm in 0..3 {
            let mut best = f64::INFINITY;
            for round in 1..=15_000 {
                let (mu, eta): (Vec<f64>, Vec<f64>) = env.means_at(round).iter().copied().unzip();
                let ratios: Vec<f64> = mu.iter().zip(&eta).map(|(m, e)| m / e).collect();
                let top = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let star = ratios.iter().position(|&r| r == top).unwrap();
                if star != arm {
                    best = best.min(top - ratios[arm]);
                }
            }
            assert_eq!(gap(&env, arm, 15_000).unwrap(), best);
        }
    }

    #[test]
    fn table2_gaps_frozen() {
        // Segment ratio tables evaluated with exact rationals: arm 1 is
        // closest to the oracle in [8000, ∞), arms 2 and 3 in [1, 500).
        let env = table2();
        let got: Vec<f64> = (0..3).map(|a| gap(&env, a, 15_000).unwrap()).collect();
        assert_relative_eq!(got[0], 0.593_939_393_939_394, epsilon = 1e-12);
        assert_relative_eq!(got[1], 0.121_212_121_212_121_22, epsilon = 1e-12);
        assert_relative_eq!(got[2], 0.240_259_740_259_740_26, epsilon = 1e-12);
        // Before the last segment arm 1's smallest shortfall comes from [500, 1000).
        assert_relative_eq!(gap(&env, 0, 7999).unwrap(), 0.8 / 1.1 - 0.1 / 1.8, epsilon = 1e-12);
    }

    #[test]
    fn lemma1_cap_values() {
        assert_eq!(lemma1_cap(15_000.0, 1.0, 1.0), 15_001.0);
        assert_eq!(lemma1_cap(0.0, 1.0, 1.0), 1.0);
        assert_eq!(lemma1_cap(0.0, 3.0, 0.25), 3.0);
        assert_eq!(lemma1_cap(10.0, 2.0, 0.5), 42.0);
    }

    fn inputs() -> BoundInputs {
        BoundInputs {
            budget: 15_000.0,
            r_max: 1.0,
            c_min: 1.0,
            c_max: f64::INFINITY,
            xi: 0.6,
            tau: 2000,
            change_points: 6,
            gaps: vec![Some(0.1), Some(0.2), Some(0.3)],
        }
    }

    /// Straight transcription used as the scalar oracle.
    fn reference(i: &BoundInputs) -> f64 {
        let t = i.tau as f64;
        let h = i.budget / i.c_min;
        let mut total = h * (1.0 - i.c_min / i.c_max) + 1.0;
        for g in &i.gaps {
            if let Some(d) = g {
                let a = (2.0 * (1.0 + i.r_max / i.c_min) + d) / (i.c_min * d);
                let saw = (h / t).ceil() / (h / t);
                let c = a * a * i.r_max * i.r_max * i.xi * saw
                    + 4.0 / t.ln() * (t.ln() / (1.0 + 4.0 * (1.0 - 1.0 / (2.0 * i.xi)).sqrt()).ln()).ceil();
                total += c * h * t.ln() / t;
            }
            total += t * i.change_points as f64 + 2.0 * t.ln().powi(2);
        }
        i.r_max * total
    }

    #[test]
    fn bound_matches_transcription() {
        let base = inputs();
        assert_relative_eq!(theorem1_bound(&base).unwrap(), reference(&base), max_relative = 1e-12);
        let mut finite = base.clone();
        finite.c_max = 4.0;
        finite.budget = 1234.5;
        finite.tau = 77;
        assert_relative_eq!(theorem1_bound(&finite).unwrap(), reference(&finite), max_relative = 1e-12);
    }

    #[test]
    fn unbounded_costs_give_linear_first_term() {
        // With no gaps, Υ = 0 and τ = 2 the per-arm part is 2 S ln² 2.
        let i = BoundInputs {
            change_points: 0,
            tau: 2,
            gaps: vec![None, None],
            ..inputs()
        };
        let rest = 2.0 * 2.0 * 2f64.ln().powi(2);
        assert_relative_eq!(theorem1_bound(&i).unwrap(), 15_001.0 + rest, epsilon = 1e-9);
    }

    #[test]
    fn monotone_on_grids() {
        let base = inputs();
        let eval = |f: &dyn Fn(&mut BoundInputs)| {
            let mut i = base.clone();
            f(&mut i);
            theorem1_bound(&i).unwrap()
        };
        let c_max: Vec<f64> = [1.0, 1.5, 3.0, 10.0, f64::INFINITY]
            .iter()
            .map(|&c| eval(&|i| i.c_max = c))
            .collect();
        assert!(c_max.windows(2).all(|w| w[1] >= w[0]));
        let budget: Vec<f64> = [100.0, 1000.0, 5000.0, 15_000.0, 40_000.0]
            .iter()
            .map(|&b| eval(&|i| i.budget = b))
            .collect();
        assert!(budget.windows(2).all(|w| w[1] > w[0]));
        let upsilon: Vec<f64> = (0..8).map(|u| eval(&|i| i.change_points = u)).collect();
        assert!(upsilon.windows(2).all(|w| w[1] > w[0]));
        let arms: Vec<f64> = (1..6).map(|s| eval(&|i| i.gaps = vec![Some(0.2); s])).collect();
        assert!(arms.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn decreasing_in_tau_when_stationary_and_fixed_cost() {
        let taus = [50, 100, 200, 400, 800, 1600, 3200];
        let values: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                theorem1_bound(&BoundInputs {
                    c_max: 1.0,
                    change_points: 0,
                    tau,
                    ..inputs()
                })
                .unwrap()
            })
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        // The C(τ, i) part carries almost all of the value.
        let i = BoundInputs {
            c_max: 1.0,
            change_points: 0,
            tau: 3200,
            ..inputs()
        };
        let c_part: f64 = i.gaps.iter().map(|g| i.c_term(g.unwrap()) * 15_000.0 * 3200f64.ln() / 3200.0).sum();
        assert!(c_part / theorem1_bound(&i).unwrap() > 0.9);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let check = |f: &dyn Fn(&mut BoundInputs)| {
            let mut i = inputs();
            f(&mut i);
            theorem1_bound(&i)
        };
        assert_eq!(check(&|i| i.xi = 0.5), Err(BoundError::Xi(0.5)));
        assert_eq!(check(&|i| i.tau = 1), Err(BoundError::Tau(1)));
        assert!(matches!(check(&|i| i.c_max = 0.5), Err(BoundError::Bounds { .. })));
        assert!(matches!(check(&|i| i.gaps[1] = Some(0.0)), Err(BoundError::Gap { arm: 1, .. })));
        assert_eq!(check(&|i| i.budget = 0.0), Err(BoundError::Budget(0.0)));
    }

    #[test]
    fn table2_inputs() {
        let i = BoundInputs::from_env(&table2(), 15_000.0, 0.6, 2000, f64::INFINITY);
        assert_eq!(i.change_points, 6);
        assert_eq!(i.arms(), 3);
        assert!(i.gaps.iter().all(Option::is_some));
        assert!(theorem1_bound(&i).unwrap() > 15_001.0);
    }
}
