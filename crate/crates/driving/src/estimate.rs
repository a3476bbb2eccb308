use evosafe_core::{validate_table, GameError, Intent, PayoffRiskTable, RawTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::episode::{episode_rng, simulate_episode, EpisodeOutcome};
use crate::params::{ParameterError, ScenarioParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrivingError {
    #[error(transparent)]
    Parameter(#[from] ParameterError),
    #[error("at least one episode per cell is required")]
    NoEpisodes,
    #[error("sampled table is not a valid game: {0}")]
    Table(#[from] GameError),
}

/// Intention pairs in sampling order; the index is the random stream.
const CELLS: [(Intent, Intent); 4] = [
    (Intent::Cooperate, Intent::Cooperate),
    (Intent::Cooperate, Intent::Defect),
    (Intent::Defect, Intent::Cooperate),
    (Intent::Defect, Intent::Defect),
];

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var =
            if values.len() > 1 { values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Estimate { mean, std_error: (var / n).sqrt() }
    }
}

/// Per-entry estimates before validation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEstimate {
    pub r_cc: Estimate,
    pub r_cd: Estimate,
    pub r_dc: Estimate,
    pub r_dd: Estimate,
    pub w_cc: Estimate,
    pub w_cd: Estimate,
    pub w_dd: Estimate,
    pub episodes_per_cell: usize,
}

impl TableEstimate {
    pub fn raw(&self) -> RawTable {
        RawTable {
            r_cc: self.r_cc.mean,
            r_cd: self.r_cd.mean,
            r_dc: self.r_dc.mean,
            r_dd: self.r_dd.mean,
            w_cc: self.w_cc.mean,
            w_cd: self.w_cd.mean,
            w_dd: self.w_dd.mean,
        }
    }
}

/// Episodes of one cell. Every episode shares `seed` and gets its own
/// stream, `4 i + cell`, so runs with different seeds never overlap.
fn run_cell(
    cell: usize,
    params: &ScenarioParams,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeOutcome>, ParameterError> {
    (0..episodes)
        .into_par_iter()
        .map(|i| simulate_episode(CELLS[cell], params, &mut episode_rng(seed, 4 * i as u64 + cell as u64)))
        .collect()
}

/// Samples all four intention cells without validating the result.
///
/// Each reward entry pools the matching role from both orderings of the
/// pair; the mixed-pair risk pools both mixed cells, so `W_CD = W_DC`.
pub fn sample_table(params: &ScenarioParams, episodes: usize, seed: u64) -> Result<TableEstimate, DrivingError> {
    if episodes == 0 {
        return Err(DrivingError::NoEpisodes);
    }
    params.validate()?;
    let cells: Vec<Vec<EpisodeOutcome>> =
        (0..CELLS.len()).map(|c| run_cell(c, params, episodes, seed)).collect::<Result<_, _>>()?;
    let [cc, cd, dc, dd] = [&cells[0], &cells[1], &cells[2], &cells[3]];

    let both =
        |a: &[EpisodeOutcome], fa: fn(&EpisodeOutcome) -> f64, b: &[EpisodeOutcome], fb: fn(&EpisodeOutcome) -> f64| {
            let values: Vec<f64> = a.iter().map(fa).chain(b.iter().map(fb)).collect();
            Estimate::of(&values)
        };
    let h = |o: &EpisodeOutcome| o.rho_h;
    let a = |o: &EpisodeOutcome| o.rho_a;
    let w = |o: &EpisodeOutcome| o.crash_prob;
    let w_of = |cell: &[EpisodeOutcome]| Estimate::of(&cell.iter().map(w).collect::<Vec<_>>());

    Ok(TableEstimate {
        r_cc: both(cc, h, cc, a),
        r_cd: both(cd, h, dc, a),
        r_dc: both(cd, a, dc, h),
        r_dd: both(dd, h, dd, a),
        w_cc: w_of(cc),
        w_cd: both(cd, w, dc, w),
        w_dd: w_of(dd),
        episodes_per_cell: episodes,
    })
}

/// Monte Carlo estimate of the reward/risk table of a scenario.
pub fn estimate_tables(params: &ScenarioParams, episodes: usize, seed: u64) -> Result<PayoffRiskTable, DrivingError> {
    let estimate = sample_table(params, episodes, seed)?;
    Ok(validate_table(estimate.raw())?)
}
