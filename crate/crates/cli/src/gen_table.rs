use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use evosafe_core::validate_table;
use evosafe_driving::{sample_table, ScenarioParams, TableEstimate};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{create, write_json, Report};

#[derive(Serialize)]
struct Values {
    values: evosafe_core::RawTable,
}

#[derive(Serialize)]
struct Provenance {
    scenario: evosafe_core::Preset,
    seed: u64,
    episodes_per_cell: usize,
    interaction_type: String,
    params: ScenarioParams,
}

#[derive(Serialize)]
struct TableFile {
    table: Values,
    provenance: Provenance,
}

#[derive(Serialize)]
struct EstimateFile<'a> {
    estimate: &'a TableEstimate,
    params: ScenarioParams,
    seed: u64,
    interaction_type: &'a str,
}

/// Samples the driving scenario of `[table.driving]` and writes `table.toml`
/// (a `[table]` block usable in other configs) and `table_estimate.json`.
/// A sample that violates the game assumptions is reported as a failure.
pub fn run_gen_table(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    config.expect_kind(ExperimentKind::GenTable)?;
    let source = config.table.driving.as_ref().context("gen-table needs a [table.driving] section")?;
    let params = source.params()?;
    let estimate = sample_table(&params, source.episodes, source.seed)?;
    let mut report = Report::default();
    let interaction_type = match validate_table(estimate.raw()).and_then(|t| t.classify_interaction()) {
        Ok(t) => t.to_string(),
        Err(e) => {
            report.fail(format!("sampled table is not usable: {e}"));
            format!("unclassified: {e}")
        }
    };

    let json_path = out.join("table_estimate.json");
    write_json(
        &json_path,
        &EstimateFile { estimate: &estimate, params, seed: source.seed, interaction_type: &interaction_type },
    )?;
    let file = TableFile {
        table: Values { values: estimate.raw() },
        provenance: Provenance {
            scenario: source.scenario,
            seed: source.seed,
            episodes_per_cell: source.episodes,
            interaction_type,
            params,
        },
    };
    let toml_path = out.join("table.toml");
    let mut w = create(&toml_path)?;
    w.write_all(toml::to_string(&file)?.as_bytes())?;
    w.flush()?;
    report.files.extend([toml_path, json_path]);
    Ok(report)
}
