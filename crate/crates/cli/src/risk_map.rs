use std::path::Path;

use anyhow::{ensure, Result};
use evosafe_core::{admissible_set, optimal_strategy, PayoffRiskTable, SegmentSet, StrategyPair};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{write_csv, write_json, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Grid,
    Admissible,
    Feasible,
    Optimum,
    Dwsc,
    Msne,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapRow {
    pub layer: Layer,
    /// Segment name for set overlays, empty otherwise.
    pub segment: String,
    pub pi_h: f64,
    pub pi_a: f64,
    pub exp_reward: f64,
    pub exp_risk: f64,
}

impl MapRow {
    fn at(layer: Layer, segment: &str, pi: StrategyPair, table: &PayoffRiskTable) -> Self {
        MapRow {
            layer,
            segment: segment.to_string(),
            pi_h: pi.pi_h(),
            pi_a: pi.pi_a(),
            exp_reward: table.expected_total_reward(pi),
            exp_risk: table.expected_risk(pi),
        }
    }
}

/// `k / (n - 1)` for `k = 0..n`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn segment_rows(layer: Layer, set: &SegmentSet, table: &PayoffRiskTable) -> Vec<MapRow> {
    let mut rows = Vec::new();
    for seg in &set.segments {
        let name = serde_json::to_value(seg.kind).expect("segment kinds serialise");
        let name = name.as_str().expect("unit variants serialise as strings");
        for x in [seg.interval.lo, seg.interval.hi] {
            rows.push(MapRow::at(layer, name, seg.point(x), table));
        }
    }
    rows
}

/// Grid rows (`pi_h` outer, `pi_a` inner) followed by the overlays.
/// An infeasible tolerance simply contributes no feasible or optimum rows.
pub fn risk_map(table: &PayoffRiskTable, n: usize, epsilon: f64) -> Result<Vec<MapRow>> {
    ensure!(n >= 2, "risk-map grid needs at least 2 points per axis, got {n}");
    let axis = unit_grid(n);
    let mut rows = Vec::with_capacity(n * n + 12);
    for &h in &axis {
        for &a in &axis {
            rows.push(MapRow::at(Layer::Grid, "", StrategyPair::new(h, a)?, table));
        }
    }
    rows.extend(segment_rows(Layer::Admissible, &admissible_set(table), table));
    if let Ok(feasible) = evosafe_core::feasible_set(table, epsilon) {
        rows.extend(segment_rows(Layer::Feasible, &feasible, table));
    }
    if let Ok(opt) = optimal_strategy(table, epsilon) {
        let name = serde_json::to_value(opt.segment)?;
        rows.push(MapRow::at(Layer::Optimum, name.as_str().unwrap_or_default(), opt.point, table));
    }
    let l = table.msne_threshold();
    rows.push(MapRow::at(Layer::Dwsc, "", StrategyPair::new(0.0, 1.0)?, table));
    rows.push(MapRow::at(Layer::Msne, "", StrategyPair::new(l, l)?, table));
    Ok(rows)
}

#[derive(Serialize)]
struct MapSummary {
    grid: usize,
    epsilon: f64,
    min_risk_cell: (f64, f64),
    min_risk: f64,
    max_reward_cell: (f64, f64),
    max_reward: f64,
    /// Best feasible admissible point; absent when nothing is feasible.
    optimum: Option<OptimumSummary>,
}

#[derive(Serialize)]
struct OptimumSummary {
    cell: (f64, f64),
    exp_reward: f64,
    exp_risk: f64,
}

/// Writes `risk_map.csv` and `risk_map_summary.json`.
pub fn run_risk_map(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.expect_kind(ExperimentKind::RiskMap)?;
    let table = config.build_table()?;
    let epsilon = config.epsilon()?;
    let rows = risk_map(&table, config.experiment.grid, epsilon)?;
    let grid: Vec<&MapRow> = rows.iter().filter(|r| r.layer == Layer::Grid).collect();
    let min = grid.iter().min_by(|a, b| a.exp_risk.total_cmp(&b.exp_risk)).expect("grid is non-empty");
    let max = grid.iter().max_by(|a, b| a.exp_reward.total_cmp(&b.exp_reward)).expect("grid is non-empty");
    let summary = MapSummary {
        grid: config.experiment.grid,
        epsilon,
        min_risk_cell: (min.pi_h, min.pi_a),
        min_risk: min.exp_risk,
        max_reward_cell: (max.pi_h, max.pi_a),
        max_reward: max.exp_reward,
        optimum: rows.iter().find(|r| r.layer == Layer::Optimum).map(|r| OptimumSummary {
            cell: (r.pi_h, r.pi_a),
            exp_reward: r.exp_reward,
            exp_risk: r.exp_risk,
        }),
    };
    let csv_path = out.join("risk_map.csv");
    let json_path = out.join("risk_map_summary.json");
    write_csv(&csv_path, &rows)?;
    write_json(&json_path, &summary)?;
    Ok(Report { files: vec![csv_path, json_path], failures: Vec::new() })
}
