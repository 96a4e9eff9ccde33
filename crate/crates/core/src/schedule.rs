//! Piece-wise constant parameter schedules indexed by round.
//!
//! Rounds are 1-indexed. A schedule maps every round `θ ≥ 1` to the value of
//! the latest breakpoint at or before `θ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Round = u64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("schedule has no breakpoints")]
    Empty,
    #[error("first breakpoint must be round 1, found {0}")]
    FirstNotOne(Round),
    #[error("breakpoints must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: Round, next: Round },
    #[error("schedule value at round {round} is not finite")]
    NonFinite { round: Round },
}

/// A step function over rounds. Serialized as a list of `[round, value]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Round, f64)>", into = "Vec<(Round, f64)>")]
pub struct PiecewiseSchedule {
    breakpoints: Vec<Round>,
    values: Vec<f64>,
}

impl PiecewiseSchedule {
    pub fn new(points: Vec<(Round, f64)>) -> Result<Self, ScheduleError> {
        let first = points.first().ok_or(ScheduleError::Empty)?;
        if first.0 != 1 {
            return Err(ScheduleError::FirstNotOne(first.0));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(ScheduleError::NotIncreasing {
                    prev: w[0].0,
                    next: w[1].0,
                });
            }
        }
        if let Some(&(round, _)) = points.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ScheduleError::NonFinite { round });
        }
        let (breakpoints, values) = points.into_iter().unzip();
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![(1, value)]).expect("constant schedule must be finite")
    }

    /// Value in force at `round` (the latest breakpoint `≤ round`).
    ///
    /// Panics if `round == 0`.
    pub fn value_at(&self, round: Round) -> f64 {
        assert!(round >= 1, "rounds are 1-indexed");
        let idx = self.breakpoints.partition_point(|&b| b <= round);
        self.values[idx - 1]
    }

    pub fn breakpoints(&self) -> &[Round] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = (Round, f64)> + '_ {
        self.breakpoints.iter().copied().zip(self.values.iter().copied())
    }

    /// Rounds `θ ≤ horizon`, `θ > 1`, at which the value actually changes.
    /// Listed breakpoints that repeat the previous value are skipped.
    pub fn change_rounds(&self, horizon: Round) -> impl Iterator<Item = Round> + '_ {
        self.breakpoints[1..]
            .iter()
            .zip(self.values.windows(2))
            .filter(move |(&b, w)| b <= horizon && w[0] != w[1])
            .map(|(&b, _)| b)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<(Round, f64)>> for PiecewiseSchedule {
    type Error = ScheduleError;

    fn try_from(points: Vec<(Round, f64)>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<PiecewiseSchedule> for Vec<(Round, f64)> {
    fn from(s: PiecewiseSchedule) -> Self {
        s.breakpoints.into_iter().zip(s.values).collect()
    }
}

/// Sorted, deduplicated rounds `≤ horizon` at which at least one schedule
/// changes value, always including the initial round 1.
pub fn change_rounds<'a, I>(schedules: I, horizon: Round) -> Vec<Round>
where
    I: IntoIterator<Item = &'a PiecewiseSchedule>,
{
    let mut rounds = vec![1];
    for s in schedules {
        rounds.extend(s.change_rounds(horizon));
    }
    rounds.sort_unstable();
    rounds.dedup();
    rounds
}

/// Number of change points up to `horizon`, counting the initial round once.
pub fn change_points_before<'a, I>(schedules: I, horizon: Round) -> usize
where
    I: IntoIterator<Item = &'a PiecewiseSchedule>,
{
    assert!(horizon >= 1, "horizon must be at least one round");
    change_rounds(schedules, horizon).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_step() -> PiecewiseSchedule {
        PiecewiseSchedule::new(vec![(1, 0.5), (500, 0.1)]).unwrap()
    }

    #[test]
    fn lookup_is_right_continuous() {
        let s = two_step();
        assert_eq!(s.value_at(1), 0.5);
        assert_eq!(s.value_at(499), 0.5);
        assert_eq!(s.value_at(500), 0.1);
        assert_eq!(s.value_at(1_000_000), 0.1);
    }

    #[test]
    fn constant_schedule_everywhere() {
        let s = PiecewiseSchedule::constant(1.7);
        for r in [1, 2, 77, 10_000] {
            assert_eq!(s.value_at(r), 1.7);
        }
        assert_eq!(change_points_before([&s], 15_000), 1);
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(PiecewiseSchedule::new(vec![]), Err(ScheduleError::Empty));
        assert_eq!(
            PiecewiseSchedule::new(vec![(2, 1.0)]),
            Err(ScheduleError::FirstNotOne(2))
        );
        assert!(matches!(
            PiecewiseSchedule::new(vec![(1, 1.0), (5, 2.0), (5, 3.0)]),
            Err(ScheduleError::NotIncreasing { .. })
        ));
        assert!(matches!(
            PiecewiseSchedule::new(vec![(1, 1.0), (5, f64::NAN)]),
            Err(ScheduleError::NonFinite { round: 5 })
        ));
    }

    #[test]
    fn change_not_yet_reached() {
        let a = two_step();
        let b = PiecewiseSchedule::new(vec![(1, 2.0), (500, 3.0)]).unwrap();
        assert_eq!(change_points_before([&a, &b], 499), 1);
        assert_eq!(change_points_before([&a, &b], 500), 2);
    }

    #[test]
    fn repeated_value_is_not_a_change() {
        let s = PiecewiseSchedule::new(vec![(1, 1.0), (10, 1.0), (20, 2.0)]).unwrap();
        assert_eq!(change_points_before([&s], 100), 2);
        assert_eq!(s.change_rounds(100).collect::<Vec<_>>(), vec![20]);
    }

    #[test]
    fn serde_as_pairs() {
        #[derive(Serialize, Deserialize)]
        struct Wrap {
            s: PiecewiseSchedule,
        }
        let text = "s = [[1, 0.5], [500, 0.1]]\n";
        let w: Wrap = toml::from_str(text).unwrap();
        assert_eq!(w.s, two_step());
        let bad = "s = [[3, 0.5]]\n";
        assert!(toml::from_str::<Wrap>(bad).is_err());
    }

    fn arb_schedule() -> impl Strategy<Value = PiecewiseSchedule> {
        prop::collection::vec((1u64..50, -3i32..3), 0..8).prop_map(|steps| {
            let mut round = 1;
            let mut points = vec![(1, 0.0)];
            for (gap, v) in steps {
                round += gap;
                points.push((round, v as f64));
            }
            PiecewiseSchedule::new(points).unwrap()
        })
    }

    proptest! {
        #[test]
        fn lookup_matches_breakpoints(s in arb_schedule()) {
            let pts: Vec<_> = s.points().collect();
            for (i, &(b, v)) in pts.iter().enumerate() {
                prop_assert_eq!(s.value_at(b), v);
                if i > 0 {
                    prop_assert_eq!(s.value_at(b - 1), pts[i - 1].1);
                }
            }
        }

        #[test]
        fn change_count_monotone(s in arb_schedule(), t in arb_schedule(), h in 1u64..400) {
            let lo = change_points_before([&s, &t], h);
            let hi = change_points_before([&s, &t], h + 1);
            prop_assert!(lo <= hi);
            prop_assert!(lo >= 1);
        }

        #[test]
        fn change_count_matches_scan(s in arb_schedule(), t in arb_schedule(), h in 1u64..400) {
            let scanned = 1 + (2..=h)
                .filter(|&r| s.value_at(r) != s.value_at(r - 1) || t.value_at(r) != t.value_at(r - 1))
                .count();
            prop_assert_eq!(change_points_before([&s, &t], h), scanned);
        }
    }
}
