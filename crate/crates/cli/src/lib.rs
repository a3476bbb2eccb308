//! Experiment runner: TOML configs in, CSV/JSON data files out.

pub mod config;
pub mod gen_table;
pub mod output;
pub mod pareto;
pub mod policy_report;
pub mod risk_map;
pub mod robustness;
pub mod trajectory;

pub use config::{ExperimentConfig, ExperimentKind};
pub use output::Report;

use std::path::Path;

use anyhow::Result;

/// Runs the experiment of the given kind.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig, out: &Path) -> Result<Report> {
    match kind {
        ExperimentKind::Trajectory => trajectory::run_trajectory(config, out),
        ExperimentKind::RiskMap => risk_map::run_risk_map(config, out),
        ExperimentKind::Pareto => pareto::run_pareto(config, out),
        ExperimentKind::Robustness => robustness::run_robustness(config, out),
        ExperimentKind::PolicyReport => policy_report::run_policy_report(config, out),
        ExperimentKind::GenTable => gen_table::run_gen_table(config, out),
    }
}
