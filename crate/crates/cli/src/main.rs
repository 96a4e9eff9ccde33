use std::path::PathBuf;
use std::process::ExitCode;

use budgeted_bandit::engine::RegretMode;
use budgeted_bandit_cli::commands::{cmd_analytic, cmd_bound, cmd_simulate, cmd_sweep, Overrides};
use budgeted_bandit_cli::validate::{cmd_validate, Status};
use budgeted_bandit_cli::{load_scenario, CliError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bbandit", version, about = "Budgeted bandit experiments for edge server selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file, or a built-in name (table2, physical).
    scenario: PathBuf,
    /// Number of replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Base random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum number of worker threads.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Directory for CSV output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Regret accounting: empirical or pseudo.
    #[arg(long)]
    regret_mode: Option<RegretMode>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            replications: self.reps,
            seed: self.seed,
            parallelism: self.parallelism,
            out_dir: self.out_dir.clone(),
            regret_mode: self.regret_mode,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every policy and write regret.csv, choices.csv and stopping.csv.
    Simulate(Common),
    /// Run the sliding-window policy over a xi × tau grid; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        xi: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<usize>,
    },
    /// Compare sampled server behavior with the closed-form laws.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Draws per server and segment.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Tabulate mean rewards, mean costs and transmission-time laws.
    Analytic(Common),
    /// Print per-arm gaps and the regret bound; writes bound.csv.
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        xi: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        tau: Vec<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => {
            let s = load_scenario(&c.scenario)?;
            let o = c.overrides();
            let res = cmd_simulate(&s, &o)?;
            let out = o.out_dir.unwrap_or(s.out_dir);
            println!(
                "{} replications, {} regret, curves truncated at round {}",
                res.oracle_rewards.len(),
                res.mode,
                res.truncation_round
            );
            println!("{:<28} {:>14} {:>10} {:>14} {:>10}", "policy", "regret@trunc", "stderr", "regret@T", "mean T");
            let labels = budgeted_bandit_cli::commands::policy_labels(&s.policies);
            for (p, label) in res.policies.iter().zip(labels) {
                let t = p.truncated_regret();
                let f = p.final_regret();
                println!(
                    "{label:<28} {:>14.2} {:>10.2} {:>14.2} {:>10.1}",
                    t.mean,
                    t.stderr,
                    f.mean,
                    p.mean_stopping()
                );
            }
            println!("wrote regret.csv, choices.csv, stopping.csv to {}", out.display());
        }
        Command::Sweep { common, xi, tau } => {
            let s = load_scenario(&common.scenario)?;
            let o = common.overrides();
            let rows = cmd_sweep(&s, &xi, &tau, &o)?;
            println!("{:>8} {:>8} {:>14} {:>10}", "xi", "tau", "mean_regret", "stderr");
            for r in &rows {
                println!("{:>8} {:>8} {:>14.2} {:>10.2}", r.xi, r.tau, r.mean_regret, r.stderr);
            }
            println!("wrote sweep.csv to {}", o.out_dir.unwrap_or(s.out_dir).display());
        }
        Command::Validate { common, samples } => {
            let s = load_scenario(&common.scenario)?;
            let seed = common.seed.unwrap_or(s.seed);
            let report = cmd_validate(&s, samples, seed, common.parallelism)?;
            for c in &report.checks {
                println!("{c}");
            }
            if report.checks.iter().any(|c| c.status == Status::NotAssessable) {
                println!("some tolerances are not assessable with {samples} samples");
            }
            if let Some(c) = report.first_failure() {
                return Err(CliError::Tolerance {
                    arm: c.arm,
                    round: c.segment_start,
                    law: c.law.name(),
                    distance: c.distance,
                    tolerance: c.tolerance,
                });
            }
        }
        Command::Analytic(c) => {
            let s = load_scenario(&c.scenario)?;
            for path in cmd_analytic(&s, &c.overrides())? {
                println!("wrote {}", path.display());
            }
        }
        Command::Bound { common, xi, tau } => {
            let s = load_scenario(&common.scenario)?;
            let o = common.overrides();
            let report = cmd_bound(&s, &xi, &tau, &o)?;
            println!("arm,gap");
            for (i, g) in report.gaps.iter().enumerate() {
                match g {
                    Some(g) => println!("{},{g}", i + 1),
                    None => println!("{},none", i + 1),
                }
            }
            println!("change points: {}", report.change_points);
            for r in &report.rows {
                println!("bound(tau={}, xi={}) = {}", r.tau, r.xi, r.bound);
            }
            println!("wrote bound.csv to {}", o.out_dir.unwrap_or(s.out_dir).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
