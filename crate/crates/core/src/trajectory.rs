use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsSpec;
use crate::game::{PayoffRiskTable, RawTable, StrategyPair};
use crate::policies::PolicySpec;

/// One recorded state with its expected reward and risk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub pi_h: f64,
    pub pi_a: f64,
    pub exp_reward: f64,
    pub exp_risk: f64,
}

impl Sample {
    pub fn new(t: f64, pi: StrategyPair, table: &PayoffRiskTable) -> Self {
        Sample {
            t,
            pi_h: pi.pi_h(),
            pi_a: pi.pi_a(),
            exp_reward: table.expected_total_reward(pi),
            exp_risk: table.expected_risk(pi),
        }
    }

    pub fn pair(&self) -> StrategyPair {
        StrategyPair::new(self.pi_h, self.pi_a).expect("samples hold probabilities")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Simulator {
    Ode,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub simulator: Simulator,
    pub table: RawTable,
    pub dynamics: DynamicsSpec,
    pub policy: PolicySpec,
    /// Strategy-time per step (the rate scale for Monte Carlo runs).
    pub dt: f64,
    pub steps: u64,
    pub record_every: u64,
    pub seed: Option<u64>,
    pub population: Option<usize>,
    /// Steps whose result had to be clamped back into `[0, 1]`.
    pub clamp_activations: u64,
    /// Steps across which the agent action changed side of the threshold.
    pub branch_crossings: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub meta: TrajectoryMeta,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least the initial sample")
    }

    pub fn pi_h_path(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.pi_h).collect()
    }

    /// Writes `t,pi_h,pi_a,exp_reward,exp_risk` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tracks which side of the threshold the agent action is on.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CrossingCounter {
    side: Option<std::cmp::Ordering>,
    pub(crate) count: u64,
}

impl CrossingCounter {
    pub(crate) fn observe(&mut self, pi_a: f64, threshold: f64) {
        let side = pi_a.partial_cmp(&threshold);
        if self.side.is_some() && side != self.side {
            self.count += 1;
        }
        self.side = side;
    }
}
