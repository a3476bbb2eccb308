//! Experiment configuration files.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use evosafe_core::{
    validate_table, Assignment, DynamicsSpec, PayoffRiskTable, PolicyKind, PolicySpec, Preset, RawTable,
};
use evosafe_driving::{estimate_tables, ScenarioParams};
use serde::{Deserialize, Serialize};

/// Either a single value or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub table: TableSource,
    #[serde(default = "default_dynamics")]
    pub dynamics: OneOrMany<DynamicsSpec>,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    /// Free-form record of where an inline table came from; ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<toml::Table>,
}

fn default_dynamics() -> OneOrMany<DynamicsSpec> {
    OneOrMany::One(DynamicsSpec::uniform_mixed())
}

/// Exactly one of `preset`, `values` or `driving`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSource {
    pub preset: Option<Preset>,
    pub values: Option<RawTable>,
    pub driving: Option<DrivingSource>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivingSource {
    /// Base scenario; `overrides` replaces individual parameters.
    pub scenario: Preset,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overrides: toml::Table,
}

fn default_episodes() -> usize {
    10_000
}

impl DrivingSource {
    pub fn params(&self) -> Result<ScenarioParams> {
        let base = ScenarioParams::preset(self.scenario);
        let mut merged = toml::Table::try_from(base).context("serialising scenario parameters")?;
        for (key, value) in &self.overrides {
            ensure!(merged.contains_key(key), "unknown scenario parameter `{key}`");
            merged.insert(key.clone(), value.clone());
        }
        let params: ScenarioParams = merged.try_into().context("scenario overrides have the wrong type")?;
        params.validate()?;
        Ok(params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default = "default_policies")]
    pub kinds: Vec<PolicyKind>,
    /// Risk tolerance of the proposed policy; defaults to the preset's reference value.
    pub epsilon: Option<f64>,
    #[serde(default = "default_gain")]
    pub gain: f64,
}

fn default_policies() -> Vec<PolicyKind> {
    vec![PolicyKind::Dwsc, PolicyKind::Msne, PolicyKind::Proposed]
}

fn default_gain() -> f64 {
    1.0
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig { kinds: default_policies(), epsilon: None, gain: default_gain() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    #[default]
    Ode,
    Mc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub simulator: SimKind,
    #[serde(default = "default_h0")]
    pub pi_h_0: OneOrMany<f64>,
    /// Integration step; for Monte Carlo the flip-probability scale is `dt / spread`.
    pub dt: Option<f64>,
    pub steps: Option<u64>,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    /// Population size.
    #[serde(default = "default_n")]
    pub n: usize,
    /// First seed; runs use `seed, seed + 1, ..`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub assignment: Assignment,
}

fn default_h0() -> OneOrMany<f64> {
    OneOrMany::One(0.9)
}

fn default_record_every() -> u64 {
    100
}

fn default_n() -> usize {
    1000
}

fn default_replicates() -> u64 {
    1
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            simulator: SimKind::Ode,
            pi_h_0: default_h0(),
            dt: None,
            steps: None,
            record_every: default_record_every(),
            n: default_n(),
            seed: 0,
            replicates: default_replicates(),
            assignment: Assignment::default(),
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(match self.simulator {
            SimKind::Ode => evosafe_core::ode::DEFAULT_DT,
            SimKind::Mc => 1e-2,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps.unwrap_or(match self.simulator {
            SimKind::Ode => evosafe_core::ode::DEFAULT_STEPS,
            SimKind::Mc => 20_000,
        })
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.replicates).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Trajectory,
    RiskMap,
    Pareto,
    Robustness,
    PolicyReport,
    GenTable,
}

/// Evenly spaced values from `from` to `to` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n).map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: Option<ExperimentKind>,
    /// Turn trajectory endpoints into pass/fail checks.
    #[serde(default)]
    pub check: bool,
    /// Risk-map points per axis.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Tolerances for the pareto sweep: an explicit list or a range.
    pub epsilons: Option<OneOrMany<f64>>,
    pub epsilon_sweep: Option<Sweep>,
    /// Allowed distance of a final `pi_h` from its target.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Allowed excess of a final risk over the tolerance.
    #[serde(default = "default_risk_slack")]
    pub risk_slack: f64,
    /// Allowed spread of final `pi_h` across seeds.
    #[serde(default = "default_spread")]
    pub max_spread: f64,
}

fn default_grid() -> usize {
    101
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_risk_slack() -> f64 {
    1e-9
}

fn default_spread() -> f64 {
    0.05
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            kind: None,
            check: false,
            grid: default_grid(),
            epsilons: None,
            epsilon_sweep: None,
            tolerance: default_tolerance(),
            risk_slack: default_risk_slack(),
            max_spread: default_spread(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        let t = &self.table;
        let sources = [t.preset.is_some(), t.values.is_some(), t.driving.is_some()];
        ensure!(
            sources.iter().filter(|&&s| s).count() == 1,
            "[table] needs exactly one of `preset`, `values` or `driving`"
        );
        ensure!(!self.dynamics.to_vec().is_empty(), "[dynamics] must list at least one rule");
        ensure!(!self.policy.kinds.is_empty(), "[policy] kinds must not be empty");
        ensure!(!self.sim.pi_h_0.to_vec().is_empty(), "[sim] pi_h_0 must not be empty");
        for h in self.sim.pi_h_0.to_vec() {
            ensure!((0.0..=1.0).contains(&h), "[sim] pi_h_0 = {h} is not a probability");
        }
        ensure!(self.sim.replicates >= 1, "[sim] replicates must be at least 1");
        if let Some(d) = &self.table.driving {
            ensure!(d.episodes >= 1, "[table.driving] episodes must be at least 1");
        }
        Ok(())
    }

    /// Rejects a config written for a different experiment.
    pub fn expect_kind(&self, kind: ExperimentKind) -> Result<()> {
        match self.experiment.kind {
            Some(k) if k != kind => bail!("config is for experiment {k:?}, not {kind:?}"),
            _ => Ok(()),
        }
    }

    /// Overrides every seed in the config.
    pub fn override_seed(&mut self, seed: u64) {
        self.sim.seed = seed;
        if let Some(d) = &mut self.table.driving {
            d.seed = seed;
        }
    }

    /// Builds the table, sampling the driving scenario if asked to.
    pub fn build_table(&self) -> Result<PayoffRiskTable> {
        let t = &self.table;
        if let Some(p) = t.preset {
            return Ok(p.table());
        }
        if let Some(raw) = t.values {
            return Ok(validate_table(raw)?);
        }
        let d = t.driving.as_ref().expect("checked on load");
        Ok(estimate_tables(&d.params()?, d.episodes, d.seed)?)
    }

    pub fn epsilon(&self) -> Result<f64> {
        match (self.policy.epsilon, self.table.preset, &self.table.driving) {
            (Some(e), _, _) => Ok(e),
            (None, Some(p), _) => Ok(p.reference_epsilon()),
            (None, None, Some(d)) => Ok(d.scenario.reference_epsilon()),
            (None, None, None) => bail!("[policy] epsilon is required for an inline table"),
        }
    }

    pub fn policies(&self, table: &PayoffRiskTable) -> Result<Vec<PolicySpec>> {
        let needs_epsilon = self.policy.kinds.contains(&PolicyKind::Proposed);
        let epsilon = if needs_epsilon { self.epsilon()? } else { 0.0 };
        self.policy
            .kinds
            .iter()
            .map(|&k| PolicySpec::new(k, table, epsilon, self.policy.gain).map_err(Into::into))
            .collect()
    }

    pub fn epsilon_grid(&self) -> Result<Vec<f64>> {
        let e = &self.experiment;
        let values = match (&e.epsilons, &e.epsilon_sweep) {
            (Some(list), None) => list.to_vec(),
            (None, Some(sweep)) => sweep.values(),
            _ => bail!("[experiment] needs exactly one of `epsilons` or `epsilon_sweep`"),
        };
        ensure!(!values.is_empty(), "the epsilon sweep is empty");
        for &eps in &values {
            ensure!(eps > 0.0 && eps < 1.0, "epsilon {eps} is outside (0, 1)");
        }
        Ok(values)
    }
}
