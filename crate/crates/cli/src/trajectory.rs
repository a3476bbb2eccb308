use std::path::Path;

use anyhow::Result;
use evosafe_core::{
    simulate_mc, simulate_ode, ClosedLoop, DynamicsSpec, McOptions, OdeOptions, PayoffRiskTable, PolicyKind,
    PolicySpec, Trajectory,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, SimKind};
use crate::output::{write_csv, write_json, Report};

/// Labels for the configured dynamics, numbered when a kind repeats.
pub fn dynamics_labels(dynamics: &[DynamicsSpec]) -> Vec<String> {
    dynamics
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let repeated = dynamics.iter().filter(|e| e.kind() == d.kind()).count() > 1;
            if repeated {
                format!("{}{i}", d.kind().name())
            } else {
                d.kind().name().to_string()
            }
        })
        .collect()
}

/// Where the human strategy should end up under a policy, if anywhere.
///
/// Always cooperating makes defection pay, so humans drift to zero; the
/// equilibrium policy removes every incentive, so they stay put.
pub fn expected_limit(policy: &PolicySpec, pi_h_0: f64) -> f64 {
    match policy.target() {
        Some(t) => t.optimum.point.pi_h(),
        None if policy.kind() == PolicyKind::Msne => pi_h_0,
        None => 0.0,
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub policy: PolicySpec,
    pub dynamics: DynamicsSpec,
    pub dynamics_label: String,
    pub pi_h_0: f64,
    pub h0_index: usize,
    pub seed: Option<u64>,
}

impl Cell {
    pub fn file_name(&self) -> String {
        let mut name = format!("{}_{}_h{}", self.policy.kind().name(), self.dynamics_label, self.h0_index);
        if let Some(seed) = self.seed {
            name.push_str(&format!("_s{seed}"));
        }
        name + ".csv"
    }
}

/// Runs one cell with the configured simulator.
pub fn run_cell(config: &ExperimentConfig, table: &PayoffRiskTable, cell: &Cell) -> Result<Trajectory> {
    let sim = &config.sim;
    Ok(match sim.simulator {
        SimKind::Ode => {
            let system = ClosedLoop { table, dynamics: &cell.dynamics, policy: &cell.policy };
            let opts = OdeOptions { dt: sim.dt(), steps: sim.steps(), record_every: sim.record_every };
            simulate_ode(&system, cell.pi_h_0, opts)?
        }
        SimKind::Mc => {
            let opts = McOptions {
                n: sim.n,
                steps: sim.steps(),
                eta: McOptions::eta_for(table, sim.dt()),
                seed: cell.seed.unwrap_or(sim.seed),
                record_every: sim.record_every,
                assignment: sim.assignment,
            };
            simulate_mc(table, &cell.dynamics, &cell.policy, cell.pi_h_0, opts)?
        }
    })
}

/// Every (policy, dynamics, initial state, seed) combination of a config.
pub fn cells(config: &ExperimentConfig, policies: &[PolicySpec]) -> Vec<Cell> {
    let dynamics = config.dynamics.to_vec();
    let labels = dynamics_labels(&dynamics);
    let seeds: Vec<Option<u64>> = match config.sim.simulator {
        SimKind::Ode => vec![None],
        SimKind::Mc => config.sim.seeds().into_iter().map(Some).collect(),
    };
    let mut out = Vec::new();
    for policy in policies {
        for (d, label) in dynamics.iter().zip(&labels) {
            for (h0_index, pi_h_0) in config.sim.pi_h_0.to_vec().into_iter().enumerate() {
                for &seed in &seeds {
                    out.push(Cell {
                        policy: *policy,
                        dynamics: *d,
                        dynamics_label: label.clone(),
                        pi_h_0,
                        h0_index,
                        seed,
                    });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryRow {
    pub policy: &'static str,
    pub dynamics: String,
    pub simulator: SimKind,
    pub pi_h_0: f64,
    pub seed: Option<u64>,
    pub t_final: f64,
    pub pi_h: f64,
    pub pi_a: f64,
    pub exp_reward: f64,
    pub exp_risk: f64,
    pub target_pi_h: f64,
    pub converged: bool,
    pub clamp_activations: u64,
    pub branch_crossings: u64,
    pub file: String,
}

pub fn summarize(cell: &Cell, traj: &Trajectory, tolerance: f64) -> SummaryRow {
    let last = traj.last();
    let target = expected_limit(&cell.policy, cell.pi_h_0);
    SummaryRow {
        policy: cell.policy.kind().name(),
        dynamics: cell.dynamics_label.clone(),
        simulator: match traj.meta.simulator {
            evosafe_core::Simulator::Ode => SimKind::Ode,
            evosafe_core::Simulator::MonteCarlo => SimKind::Mc,
        },
        pi_h_0: cell.pi_h_0,
        seed: cell.seed,
        t_final: last.t,
        pi_h: last.pi_h,
        pi_a: last.pi_a,
        exp_reward: last.exp_reward,
        exp_risk: last.exp_risk,
        target_pi_h: target,
        converged: (last.pi_h - target).abs() < tolerance,
        clamp_activations: traj.meta.clamp_activations,
        branch_crossings: traj.meta.branch_crossings,
        file: format!("trajectories/{}", cell.file_name()),
    }
}

#[derive(Serialize)]
struct RunInfo<'a> {
    config: &'a ExperimentConfig,
    table: evosafe_core::RawTable,
    threshold: f64,
    policies: &'a [PolicySpec],
}

/// One CSV per cell under `trajectories/`, plus `summary.csv` and `run.json`.
///
/// With `check` set, every proposed-policy cell must end at its target
/// with risk within the tolerance.
pub fn run_trajectory(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.expect_kind(ExperimentKind::Trajectory)?;
    let table = config.build_table()?;
    let policies = config.policies(&table)?;
    let cells = cells(config, &policies);
    let tolerance = config.experiment.tolerance;

    let rows: Vec<SummaryRow> = cells
        .par_iter()
        .map(|cell| {
            let traj = run_cell(config, &table, cell)?;
            traj.write_csv(crate::output::create(&out.join("trajectories").join(cell.file_name()))?)?;
            Ok(summarize(cell, &traj, tolerance))
        })
        .collect::<Result<_>>()?;

    let mut report = Report::default();
    for row in &rows {
        report.files.push(out.join(&row.file));
        if config.experiment.check && row.policy == PolicyKind::Proposed.name() {
            let epsilon = config.epsilon()?;
            if !row.converged {
                report.fail(format!(
                    "{}: pi_h = {} did not reach target {} within {tolerance}",
                    row.file, row.pi_h, row.target_pi_h
                ));
            }
            if row.exp_risk > epsilon + config.experiment.risk_slack {
                report.fail(format!("{}: final risk {} exceeds epsilon {epsilon}", row.file, row.exp_risk));
            }
        }
    }
    let summary = out.join("summary.csv");
    write_csv(&summary, &rows)?;
    let info = out.join("run.json");
    write_json(&info, &RunInfo { config, table: table.raw(), threshold: table.msne_threshold(), policies: &policies })?;
    report.files.extend([summary, info]);
    Ok(report)
}
