use std::path::Path;

use anyhow::Result;
use evosafe_core::{
    admissible_set, feasible_set, optimal_strategy, OptimalStrategy, PayoffRiskTable, PolicyKind, PolicySpec, RawTable,
    SegmentSet, StrategyPair,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{write_json, Report};

#[derive(Clone, Debug, Serialize)]
pub struct PointValue {
    pub pi_h: f64,
    pub pi_a: f64,
    pub exp_reward: f64,
    pub exp_risk: f64,
}

impl PointValue {
    fn at(pi: StrategyPair, table: &PayoffRiskTable) -> Self {
        PointValue {
            pi_h: pi.pi_h(),
            pi_a: pi.pi_a(),
            exp_reward: table.expected_total_reward(pi),
            exp_risk: table.expected_risk(pi),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionRow {
    pub pi_h: f64,
    pub dwsc: f64,
    pub msne: f64,
    pub proposed: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolicyReport {
    pub table: RawTable,
    pub interaction_type: String,
    pub threshold: f64,
    pub reward_spread: f64,
    pub epsilon: f64,
    pub admissible: SegmentSet,
    /// `Err` text when the tolerance is below every admissible risk.
    pub feasible: Result<SegmentSet, String>,
    pub optimum: Result<OptimalStrategy, String>,
    /// Where always cooperating leads: humans defect, `(0, 1)`.
    pub dwsc_limit: PointValue,
    pub msne_point: PointValue,
    pub actions: Vec<ActionRow>,
}

pub fn policy_report(table: &PayoffRiskTable, epsilon: f64, gain: f64) -> Result<PolicyReport> {
    let l = table.msne_threshold();
    let dwsc = PolicySpec::new(PolicyKind::Dwsc, table, epsilon, gain)?;
    let msne = PolicySpec::new(PolicyKind::Msne, table, epsilon, gain)?;
    let proposed = PolicySpec::proposed(table, epsilon, gain).ok();
    let actions = (0..=10)
        .map(|i| {
            let h = i as f64 / 10.0;
            ActionRow { pi_h: h, dwsc: dwsc.action(h), msne: msne.action(h), proposed: proposed.map(|p| p.action(h)) }
        })
        .collect();
    Ok(PolicyReport {
        table: table.raw(),
        interaction_type: match table.classify_interaction() {
            Ok(t) => t.to_string(),
            Err(e) => format!("unclassified: {e}"),
        },
        threshold: l,
        reward_spread: table.reward_spread(),
        epsilon,
        admissible: admissible_set(table),
        feasible: feasible_set(table, epsilon).map_err(|e| e.to_string()),
        optimum: optimal_strategy(table, epsilon).map_err(|e| e.to_string()),
        dwsc_limit: PointValue::at(StrategyPair::new(0.0, 1.0)?, table),
        msne_point: PointValue::at(StrategyPair::new(l, l)?, table),
        actions,
    })
}

/// Writes `policy.json`.
pub fn run_policy_report(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.expect_kind(ExperimentKind::PolicyReport)?;
    let table = config.build_table()?;
    let report = policy_report(&table, config.epsilon()?, config.policy.gain)?;
    let path = out.join("policy.json");
    write_json(&path, &report)?;
    Ok(Report { files: vec![path], failures: Vec::new() })
}
