use std::path::Path;

use anyhow::Result;
use evosafe_core::{optimal_strategy, Branch, PayoffRiskTable, PolicyError, SegmentKind};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{write_csv, Report};

/// Risk may exceed the tolerance by this relative amount from rounding alone.
pub const RISK_ROUNDING: f64 = 4.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParetoRow {
    pub epsilon: f64,
    pub status: Status,
    pub pi_h: Option<f64>,
    pub pi_a: Option<f64>,
    pub exp_reward: Option<f64>,
    pub exp_risk: Option<f64>,
    pub branch: Option<Branch>,
    pub segment: Option<SegmentKind>,
    pub attained: Option<bool>,
}

/// The optimum for each tolerance, or an infeasible marker.
pub fn pareto_sweep(table: &PayoffRiskTable, epsilons: &[f64]) -> Result<Vec<ParetoRow>> {
    epsilons
        .iter()
        .map(|&epsilon| match optimal_strategy(table, epsilon) {
            Ok(opt) => Ok(ParetoRow {
                epsilon,
                status: Status::Feasible,
                pi_h: Some(opt.point.pi_h()),
                pi_a: Some(opt.point.pi_a()),
                exp_reward: Some(opt.expected_reward),
                exp_risk: Some(opt.expected_risk),
                branch: Some(opt.branch),
                segment: Some(opt.segment),
                attained: Some(opt.attained),
            }),
            Err(PolicyError::InfeasibleTolerance { .. }) => Ok(ParetoRow {
                epsilon,
                status: Status::Infeasible,
                pi_h: None,
                pi_a: None,
                exp_reward: None,
                exp_risk: None,
                branch: None,
                segment: None,
                attained: None,
            }),
            Err(e) => Err(e.into()),
        })
        .collect()
}

/// Failed checks: risk above tolerance, or reward dropping as the tolerance grows.
pub fn check_sweep(rows: &[ParetoRow]) -> Vec<String> {
    let mut failures = Vec::new();
    let mut sorted: Vec<&ParetoRow> = rows.iter().filter(|r| r.status == Status::Feasible).collect();
    sorted.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    for r in &sorted {
        let risk = r.exp_risk.expect("feasible rows carry a risk");
        if risk > r.epsilon * (1.0 + RISK_ROUNDING) {
            failures.push(format!("epsilon {}: optimum risk {risk} exceeds the tolerance", r.epsilon));
        }
    }
    for pair in sorted.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let (r_lo, r_hi) = (lo.exp_reward.unwrap(), hi.exp_reward.unwrap());
        if r_hi < r_lo - evosafe_core::policies::REWARD_TIE_TOLERANCE {
            failures.push(format!(
                "reward drops from {r_lo} at epsilon {} to {r_hi} at epsilon {}",
                lo.epsilon, hi.epsilon
            ));
        }
    }
    failures
}

/// Writes `pareto.csv`.
pub fn run_pareto(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.expect_kind(ExperimentKind::Pareto)?;
    let table = config.build_table()?;
    let rows = pareto_sweep(&table, &config.epsilon_grid()?)?;
    let path = out.join("pareto.csv");
    write_csv(&path, &rows)?;
    Ok(Report { files: vec![path], failures: check_sweep(&rows) })
}
