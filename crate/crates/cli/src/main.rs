use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use evosafe_cli::{ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "evosafe", version, about = "Strategic human-machine interaction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Strategy trajectories for every policy and dynamics in the config.
    Trajectory(Common),
    /// Expected reward and risk over the strategy square, with set overlays.
    RiskMap(Common),
    /// Optimal strategy across a sweep of risk tolerances.
    Pareto(Common),
    /// Proposed-policy endpoints across initial states and seeds.
    Robustness(Common),
    /// Thresholds, strategy sets and policy actions for one table.
    Policy(Common),
    /// Estimate a reward/risk table from the driving simulation.
    GenTable(Common),
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Trajectory(c) => (ExperimentKind::Trajectory, c),
        Command::RiskMap(c) => (ExperimentKind::RiskMap, c),
        Command::Pareto(c) => (ExperimentKind::Pareto, c),
        Command::Robustness(c) => (ExperimentKind::Robustness, c),
        Command::Policy(c) => (ExperimentKind::PolicyReport, c),
        Command::GenTable(c) => (ExperimentKind::GenTable, c),
    };
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.override_seed(seed);
    }
    let report = evosafe_cli::run(kind, &config, &common.out)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    for msg in &report.failures {
        eprintln!("FAILED: {msg}");
    }
    Ok(report.ok())
}
