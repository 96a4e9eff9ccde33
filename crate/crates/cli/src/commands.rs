//! The experiment commands. Each one reads a validated scenario and writes
//! plot-ready CSV files into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use budgeted_bandit::bound::{theorem1_bound, BoundInputs};
use budgeted_bandit::engine::{monte_carlo, McConfig, McResults, RegretMode};
use budgeted_bandit::environment::ArmSet;
use budgeted_bandit::policies::{PolicyConfig, PolicyKind};
use budgeted_bandit::schedule::{self, Round};
use serde::Serialize;

use crate::scenario::Scenario;
use crate::CliError;

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub regret_mode: Option<RegretMode>,
}

impl Overrides {
    pub fn apply(&self, scenario: &Scenario) -> Result<Scenario, CliError> {
        let mut s = scenario.clone();
        if let Some(r) = self.replications {
            s.replications = r;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(dir) = &self.out_dir {
            s.out_dir = dir.clone();
        }
        if let Some(mode) = self.regret_mode {
            s.regret_mode = mode;
        }
        s.validate().map_err(CliError::Usage)?;
        Ok(s)
    }

    fn mc_config(&self, s: &Scenario) -> McConfig {
        McConfig {
            budget: s.budget,
            replications: s.replications,
            base_seed: s.seed,
            parallelism: self.parallelism,
            mode: s.regret_mode,
        }
    }
}

/// Column label of each policy: the kind name, with parameters appended
/// when the scenario lists the same kind more than once.
pub fn policy_labels(policies: &[PolicyConfig]) -> Vec<String> {
    policies
        .iter()
        .map(|p| {
            if policies.iter().filter(|q| q.kind == p.kind).count() == 1 {
                return p.kind.to_string();
            }
            let mut parts = Vec::new();
            if let Some(xi) = p.xi {
                parts.push(format!("xi={xi}"));
            }
            if let Some(tau) = p.tau {
                parts.push(format!("tau={tau}"));
            }
            format!("{}[{}]", p.kind, parts.join(";"))
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Csv {
        path: path.to_owned(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

#[derive(Serialize)]
struct RegretRow<'a> {
    round: Round,
    policy: &'a str,
    mean_regret: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct ChoiceRow<'a> {
    round: Round,
    policy: &'a str,
    optimal_play_rate: f64,
    oracle_arm: usize,
    modal_arm: usize,
}

#[derive(Serialize)]
struct StoppingRow<'a> {
    policy: &'a str,
    #[serde(rename = "mean_T")]
    mean_t: f64,
    #[serde(rename = "min_T")]
    min_t: Round,
    #[serde(rename = "max_T")]
    max_t: Round,
}

/// Runs the scenario and writes `regret.csv`, `choices.csv` and
/// `stopping.csv`.
pub fn cmd_simulate(scenario: &Scenario, overrides: &Overrides) -> Result<McResults, CliError> {
    let s = overrides.apply(scenario)?;
    let results = monte_carlo(&s.environment, &s.policies, &overrides.mc_config(&s))?;
    create_dir(&s.out_dir)?;
    let labels = policy_labels(&s.policies);

    write_csv(
        &s.out_dir.join("regret.csv"),
        results.policies.iter().zip(&labels).flat_map(|(p, label)| {
            p.curve.mean.iter().zip(&p.curve.stderr).enumerate().map(move |(i, (&m, &e))| RegretRow {
                round: i as Round + 1,
                policy: label,
                mean_regret: m,
                stderr: e,
            })
        }),
    )?;
    write_csv(
        &s.out_dir.join("choices.csv"),
        results.policies.iter().zip(&labels).flat_map(|(p, label)| {
            let oracle = &results.oracle_arm;
            (0..p.optimal_play_rate.len()).map(move |i| ChoiceRow {
                round: i as Round + 1,
                policy: label,
                optimal_play_rate: p.optimal_play_rate[i],
                oracle_arm: oracle[i] + 1,
                modal_arm: p.modal_arm[i] + 1,
            })
        }),
    )?;
    write_csv(
        &s.out_dir.join("stopping.csv"),
        results.policies.iter().zip(&labels).map(|(p, label)| StoppingRow {
            policy: label,
            mean_t: p.mean_stopping(),
            min_t: p.min_stopping(),
            max_t: p.max_stopping(),
        }),
    )?;
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub xi: f64,
    pub tau: usize,
    pub mean_regret: f64,
    pub stderr: f64,
}

/// Runs the sliding-window policy over the `ξ × τ` grid and writes
/// `sweep.csv`. All grid points share one truncation round and the regret
/// reported is the curve value there.
pub fn cmd_sweep(
    scenario: &Scenario,
    xis: &[f64],
    taus: &[usize],
    overrides: &Overrides,
) -> Result<Vec<SweepRow>, CliError> {
    if xis.is_empty() || taus.is_empty() {
        return Err(CliError::Usage("sweep grids must be nonempty".into()));
    }
    let mut s = overrides.apply(scenario)?;
    s.policies = xis
        .iter()
        .flat_map(|&xi| taus.iter().map(move |&tau| PolicyConfig::swucb(xi, tau)))
        .collect();
    s.validate().map_err(CliError::Usage)?;
    let results = monte_carlo(&s.environment, &s.policies, &overrides.mc_config(&s))?;
    let rows: Vec<SweepRow> = results
        .policies
        .iter()
        .map(|p| {
            let r = p.truncated_regret();
            SweepRow {
                xi: p.config.xi(),
                tau: p.config.tau(),
                mean_regret: r.mean,
                stderr: r.stderr,
            }
        })
        .collect();
    create_dir(&s.out_dir)?;
    write_csv(&s.out_dir.join("sweep.csv"), rows.iter())?;
    Ok(rows)
}

#[derive(Serialize)]
struct PmfRow {
    arm: usize,
    round: Round,
    k: u64,
    pmf: f64,
}

#[derive(Serialize)]
struct MeansRow {
    round: Round,
    arm: usize,
    mu: f64,
    eta: f64,
}

/// Tabulates the closed-form laws: `means.csv` with `(μ, η)` of every arm at
/// every change round and, for physical servers, `pmf.csv` with the
/// transmission-time law of every arm on each of its segments.
pub fn cmd_analytic(scenario: &Scenario, overrides: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let s = overrides.apply(scenario)?;
    create_dir(&s.out_dir)?;
    let env = &s.environment;
    let mut written = Vec::new();

    let means = s.out_dir.join("means.csv");
    write_csv(
        &means,
        env.change_rounds(Round::MAX).into_iter().flat_map(|round| {
            env.means_at(round).iter().enumerate().map(move |(arm, &(mu, eta))| MeansRow {
                round,
                arm: arm + 1,
                mu,
                eta,
            })
        }),
    )?;
    written.push(means);

    if let ArmSet::Generative { arms } = env.arms() {
        let pmf = s.out_dir.join("pmf.csv");
        let mut rows = Vec::new();
        for (i, a) in arms.iter().enumerate() {
            for round in schedule::change_rounds(a.server.schedules(), Round::MAX) {
                let table = a.server.transmission_law(round).table();
                rows.extend(table.into_iter().enumerate().map(|(k, p)| PmfRow {
                    arm: i + 1,
                    round,
                    k: k as u64 + 1,
                    pmf: p,
                }));
            }
        }
        write_csv(&pmf, rows)?;
        written.push(pmf);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `Δ(i)` per arm, `None` when the arm is optimal throughout.
    pub gaps: Vec<Option<f64>>,
    pub change_points: usize,
    pub rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub tau: usize,
    pub xi: f64,
    pub bound: f64,
}

/// Evaluates the regret bound for each `(τ, ξ)` pair and writes
/// `bound.csv`. Without explicit grids the scenario's sliding-window
/// policies supply the pairs. Single-pull costs are unbounded in both
/// environment kinds, so `c_max = ∞`.
pub fn cmd_bound(
    scenario: &Scenario,
    xis: &[f64],
    taus: &[usize],
    overrides: &Overrides,
) -> Result<BoundReport, CliError> {
    let s = overrides.apply(scenario)?;
    let pairs: Vec<(usize, f64)> = if xis.is_empty() && taus.is_empty() {
        let from_policies: Vec<_> = s
            .policies
            .iter()
            .filter(|p| p.kind == PolicyKind::BprpcSwucb)
            .map(|p| (p.tau(), p.xi()))
            .collect();
        if from_policies.is_empty() {
            let d = PolicyConfig::new(PolicyKind::BprpcSwucb);
            vec![(d.tau(), d.xi())]
        } else {
            from_policies
        }
    } else if xis.is_empty() || taus.is_empty() {
        return Err(CliError::Usage("give both --xi and --tau grids, or neither".into()));
    } else {
        taus.iter().flat_map(|&t| xis.iter().map(move |&x| (t, x))).collect()
    };

    let env = &s.environment;
    let budget = s.budget.get();
    let mut rows = Vec::new();
    let mut inputs = None;
    for (tau, xi) in pairs {
        let i = BoundInputs::from_env(env, budget, xi, tau, f64::INFINITY);
        rows.push(BoundRow {
            tau,
            xi,
            bound: theorem1_bound(&i)?,
        });
        inputs = Some(i);
    }
    let inputs = inputs.expect("at least one grid point");
    create_dir(&s.out_dir)?;
    write_csv(&s.out_dir.join("bound.csv"), rows.iter())?;
    Ok(BoundReport {
        gaps: inputs.gaps,
        change_points: inputs.change_points,
        rows,
    })
}
