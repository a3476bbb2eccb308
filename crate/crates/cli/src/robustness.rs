use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{ensure, Result};
use evosafe_core::PolicySpec;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, SimKind};
use crate::output::{write_csv, Report};
use crate::trajectory::{cells, run_cell};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointRow {
    pub dynamics: String,
    pub pi_h_0: f64,
    pub seed: Option<u64>,
    pub pi_h: f64,
    pub pi_a: f64,
    pub exp_reward: f64,
    pub exp_risk: f64,
    pub target_pi_h: f64,
    pub abs_error: f64,
    pub within_epsilon: bool,
}

/// Proposed-policy endpoints for every initial state and seed; `[policy]
/// kinds` is not consulted.
pub fn robustness_rows(config: &ExperimentConfig) -> Result<(f64, Vec<EndpointRow>)> {
    let table = config.build_table()?;
    let epsilon = config.epsilon()?;
    let policy = PolicySpec::proposed(&table, epsilon, config.policy.gain)?;
    let target = policy.target().expect("proposed policies carry a target").optimum.point.pi_h();
    let mut run = config.clone();
    // Only endpoints matter here.
    run.sim.record_every = run.sim.steps();
    let slack = config.experiment.risk_slack;
    let rows = cells(&run, &[policy])
        .par_iter()
        .map(|cell| {
            let traj = run_cell(&run, &table, cell)?;
            let last = traj.last();
            Ok(EndpointRow {
                dynamics: cell.dynamics_label.clone(),
                pi_h_0: cell.pi_h_0,
                seed: cell.seed,
                pi_h: last.pi_h,
                pi_a: last.pi_a,
                exp_reward: last.exp_reward,
                exp_risk: last.exp_risk,
                target_pi_h: target,
                abs_error: (last.pi_h - target).abs(),
                within_epsilon: last.exp_risk <= epsilon + slack,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((epsilon, rows))
}

/// Writes `robustness.csv`. Every endpoint must respect the tolerance; ODE
/// endpoints must also reach the target, and Monte Carlo endpoints of one
/// initial state must agree across seeds.
pub fn run_robustness(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.expect_kind(ExperimentKind::Robustness)?;
    let runs = config.sim.pi_h_0.to_vec().len() as u64
        * if config.sim.simulator == SimKind::Mc { config.sim.replicates } else { 1 };
    ensure!(runs >= 2, "robustness needs at least two initial states or seeds");
    let (epsilon, rows) = robustness_rows(config)?;
    let mut report = Report::default();
    let exp = &config.experiment;
    for r in &rows {
        if !r.within_epsilon {
            report.fail(format!(
                "{} from pi_h_0 = {} (seed {:?}): risk {} exceeds epsilon {epsilon}",
                r.dynamics, r.pi_h_0, r.seed, r.exp_risk
            ));
        }
        if config.sim.simulator == SimKind::Ode && r.abs_error >= exp.tolerance {
            report
                .fail(format!("{} from pi_h_0 = {}: ended {} away from the target", r.dynamics, r.pi_h_0, r.abs_error));
        }
    }
    if config.sim.simulator == SimKind::Mc {
        let mut groups: BTreeMap<(String, u64), (f64, f64)> = BTreeMap::new();
        for r in &rows {
            let e =
                groups.entry((r.dynamics.clone(), r.pi_h_0.to_bits())).or_insert((f64::INFINITY, f64::NEG_INFINITY));
            e.0 = e.0.min(r.pi_h);
            e.1 = e.1.max(r.pi_h);
        }
        for ((dynamics, h0), (lo, hi)) in groups {
            if hi - lo >= exp.max_spread {
                report.fail(format!(
                    "{dynamics} from pi_h_0 = {}: endpoint spread {} across seeds",
                    f64::from_bits(h0),
                    hi - lo
                ));
            }
        }
    }
    let path = out.join("robustness.csv");
    write_csv(&path, &rows)?;
    report.files.push(path);
    Ok(report)
}
