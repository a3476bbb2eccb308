use evosafe_core::Intent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::params::{ParameterError, ScenarioParams};
use crate::vehicle::{vehicle_step, Control, NoiseDraws, VehicleState};

/// Rewards of both vehicles and the probability that either crashed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub rho_h: f64,
    pub rho_a: f64,
    pub crash_prob: f64,
}

/// What a vehicle is trying to do for the whole episode.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Plan {
    speed: f64,
    lane: f64,
}

fn plan(me: Intent, other: Intent, params: &ScenarioParams) -> Plan {
    let p = params;
    match (me, other) {
        // Side by side, each keeping half of a speed-proportional gap.
        (Intent::Cooperate, Intent::Cooperate) => Plan { speed: p.nu2, lane: 0.5 * p.gap_gain * p.nu2 },
        // Neither yields: each holds the middle of its half of the pavement.
        (Intent::Defect, Intent::Defect) => Plan { speed: p.nu1, lane: 0.5 * p.paved_half_width },
        (Intent::Defect, Intent::Cooperate) => Plan { speed: p.nu1, lane: 0.0 },
        // Yield to a defector in the centre: the full gap, at least onto the gravel.
        (Intent::Cooperate, Intent::Defect) => {
            Plan { speed: p.nu3, lane: (p.gap_gain * p.nu1).max(p.paved_half_width + p.gravel_offset) }
        }
    }
}

/// Target-tracking controller; on gravel the target speed drops to `nu3`.
fn control(state: &VehicleState, plan: Plan, params: &ScenarioParams) -> Control {
    let target = if params.on_gravel(state.p_y) { params.nu3 } else { plan.speed };
    let error = target - state.v;
    let accel = if error.abs() < params.speed_deadband {
        0.0
    } else {
        (params.speed_gain * error).clamp(-params.max_brake, params.max_accel)
    };
    let steer = (-params.lateral_gain * (state.p_y - plan.lane) - params.heading_gain * state.theta)
        .clamp(-params.max_steer, params.max_steer);
    Control { accel, steer }
}

/// Per-step crash probability of one vehicle.
fn hazard(state: &VehicleState, params: &ScenarioParams) -> f64 {
    if params.on_gravel(state.p_y) {
        (params.kappa * (state.v - params.nu3).max(0.0) * params.dt).min(1.0)
    } else {
        0.0
    }
}

/// Random draws of an episode: ChaCha8 seeded with `seed`, stream `stream`.
pub fn episode_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs both vehicles for the horizon. Each starts at its planned speed and
/// lane; the crash probability is the complement of the survival product.
pub fn simulate_episode(
    intents: (Intent, Intent),
    params: &ScenarioParams,
    rng: &mut impl Rng,
) -> Result<EpisodeOutcome, ParameterError> {
    params.validate()?;
    let plans = [plan(intents.0, intents.1, params), plan(intents.1, intents.0, params)];
    let mut states = plans.map(|p| VehicleState { p_x: 0.0, p_y: p.lane, v: p.speed, theta: 0.0 });
    let mut fuel = [0.0; 2];
    let mut log_survival = 0.0;
    for _ in 0..params.horizon {
        for ((state, plan), fuel) in states.iter_mut().zip(plans).zip(&mut fuel) {
            let u = control(state, plan, params);
            log_survival += (-hazard(state, params)).ln_1p();
            *fuel += params.fuel_cost * u.accel.max(0.0);
            let noise = NoiseDraws { accel: rng.sample(StandardNormal), steer: rng.sample(StandardNormal) };
            *state = vehicle_step(state, u, params, noise);
        }
    }
    Ok(EpisodeOutcome {
        rho_h: states[0].p_x - fuel[0],
        rho_a: states[1].p_x - fuel[1],
        crash_prob: -log_survival.exp_m1(),
    })
}
