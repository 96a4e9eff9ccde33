//! Monte Carlo cross-check of the closed-form server laws against the
//! sampler, one stationary segment at a time.

use std::fmt;

use budgeted_bandit::engine::streams::{stream, Role};
use budgeted_bandit::environment::{ArmSet, ServerArm};
use budgeted_bandit::netmodel::{
    cost_cdf, cost_pdf, expected_cost, reward_mean, sample_pull, ServerModel,
};
use budgeted_bandit::schedule::{self, Round};
use rayon::prelude::*;

use crate::scenario::Scenario;
use crate::CliError;

pub const TV_TOLERANCE: f64 = 0.005;
/// Tighter bound for single-hop routes, where the law is exactly geometric.
pub const TV_TOLERANCE_SINGLE_HOP: f64 = 0.002;
pub const REWARD_TOLERANCE: f64 = 0.005;
pub const COST_MEAN_TOLERANCE: f64 = 0.005;
pub const KS_TOLERANCE: f64 = 0.01;
pub const PDF_MASS_TOLERANCE: f64 = 1e-6;

/// Quantile of the Kolmogorov distribution at level 0.99.
const KS_QUANTILE_99: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    TransmissionPmf,
    RewardMean,
    CostMean,
    CostDistribution,
    CostPdfMass,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::TransmissionPmf => "transmission pmf (TV)",
            Law::RewardMean => "reward mean (abs error)",
            Law::CostMean => "cost mean (rel error)",
            Law::CostDistribution => "cost law (KS)",
            Law::CostPdfMass => "cost pdf mass (abs error)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Sampling noise at this sample size is comparable to the tolerance.
    NotAssessable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// 1-based arm number.
    pub arm: usize,
    pub segment_start: Round,
    pub law: Law,
    pub distance: f64,
    pub tolerance: f64,
    pub status: Status,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotAssessable => "NOT ASSESSABLE",
        };
        write!(
            f,
            "{status:<14} arm {} from round {:<6} {:<26} {:.3e} (tolerance {:.0e})",
            self.arm,
            self.segment_start,
            self.law.name(),
            self.distance,
            self.tolerance,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.status == Status::Fail)
    }
}

fn judge(distance: f64, tolerance: f64, noise: f64) -> Status {
    if noise >= tolerance {
        Status::NotAssessable
    } else if distance < tolerance {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Total-variation distance between integer samples and a pmf on `1..`,
/// counting unmatched mass on both sides.
pub fn total_variation(samples: &[u64], pmf: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mut counts = vec![0u64; pmf.len()];
    let mut outside = 0u64;
    for &k in samples {
        match (k as usize).checked_sub(1).and_then(|i| counts.get_mut(i)) {
            Some(c) => *c += 1,
            None => outside += 1,
        }
    }
    let inside: f64 = counts
        .iter()
        .zip(pmf)
        .map(|(&c, &p)| (c as f64 / n - p).abs())
        .sum();
    let missing = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
    0.5 * (inside + outside as f64 / n + missing)
}

/// Largest gap between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Integral of the cost density: each continuous piece between consecutive
/// slot boundaries numerically, then the common exponential tail exactly.
pub fn cost_pdf_mass(server: &ServerModel, round: Round) -> f64 {
    let e = server.energy();
    let law = server.transmission_law(round);
    let last = law.table().len() as u64;
    let edge = |k: u64| e.a_double_prime + e.a_prime * k as f64;
    let pieces: f64 = (1..=last)
        .map(|k| quadrature::integrate(|x| cost_pdf(server, round, x), edge(k), edge(k + 1), 1e-13).integral)
        .sum();
    let rate = server.processing_rate(round) / e.a;
    pieces + cost_pdf(server, round, edge(last + 1)) / rate
}

fn check_segment(arm: &ServerArm, index: usize, round: Round, samples: usize, seed: u64, stream_id: u64) -> Vec<Check> {
    let server = &arm.server;
    let mut rng = stream(seed, stream_id, Role::Environment);
    let mut slots = Vec::with_capacity(samples);
    let mut costs = Vec::with_capacity(samples);
    let mut rewards = 0.0;
    for _ in 0..samples {
        let o = sample_pull(server, arm.qos_threshold, round, &mut rng);
        slots.push(o.transmission_time);
        costs.push(o.cost);
        rewards += o.reward;
    }
    let n = samples as f64;
    let check = |law, distance, tolerance, noise| Check {
        arm: index + 1,
        segment_start: round,
        law,
        distance,
        tolerance,
        status: judge(distance, tolerance, noise),
    };

    let pmf = server.transmission_law(round).table();
    let tv_tol = if server.geometry().max_hops == 1 {
        TV_TOLERANCE_SINGLE_HOP
    } else {
        TV_TOLERANCE
    };
    // Twice the expected TV of an exact sampler.
    let tv_noise = pmf
        .iter()
        .map(|p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n)).sqrt())
        .sum::<f64>();

    let mu = reward_mean(server, arm.qos_threshold, round);
    let eta = expected_cost(server, round);
    let cost_mean = costs.iter().sum::<f64>() / n;
    let cost_sd = (costs.iter().map(|c| (c - cost_mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let mass = cost_pdf_mass(server, round);

    vec![
        check(Law::TransmissionPmf, total_variation(&slots, &pmf), tv_tol, tv_noise),
        check(Law::RewardMean, (rewards / n - mu).abs(), REWARD_TOLERANCE, 4.0 * (mu * (1.0 - mu) / n).sqrt()),
        check(
            Law::CostMean,
            (cost_mean - eta).abs() / eta,
            COST_MEAN_TOLERANCE,
            4.0 * cost_sd / (eta * n.sqrt()),
        ),
        check(
            Law::CostDistribution,
            ks_distance(&mut costs, |x| cost_cdf(server, round, x)),
            KS_TOLERANCE,
            KS_QUANTILE_99 / n.sqrt(),
        ),
        check(Law::CostPdfMass, (mass - 1.0).abs(), PDF_MASS_TOLERANCE, 0.0),
    ]
}

/// Samples every server on each of its stationary segments and compares
/// the draws with the closed forms.
pub fn cmd_validate(
    scenario: &Scenario,
    samples: usize,
    seed: u64,
    parallelism: Option<usize>,
) -> Result<ValidationReport, CliError> {
    let ArmSet::Generative { arms } = scenario.environment.arms() else {
        return Err(CliError::Usage(format!(
            "scenario {} has parametric arms; validate needs physical servers",
            scenario.name
        )));
    };
    if samples < 2 {
        return Err(CliError::Usage("validate needs at least 2 samples".into()));
    }
    let tasks: Vec<(usize, Round)> = arms
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            schedule::change_rounds(a.server.schedules(), Round::MAX)
                .into_iter()
                .map(move |r| (i, r))
        })
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = parallelism {
        if n == 0 {
            return Err(CliError::Usage("parallelism must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let checks: Vec<Vec<Check>> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(t, &(i, round))| check_segment(&arms[i], i, round, samples, seed, t as u64))
            .collect()
    });
    Ok(ValidationReport {
        samples,
        checks: checks.into_iter().flatten().collect(),
    })
}
