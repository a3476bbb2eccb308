use serde::{Deserialize, Serialize};

use crate::params::ScenarioParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub p_x: f64,
    /// Lateral offset from the road centre, positive towards the shoulder.
    pub p_y: f64,
    pub v: f64,
    pub theta: f64,
}

/// Commanded acceleration and steering rate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Control {
    pub accel: f64,
    pub steer: f64,
}

/// Standard normal draws for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoiseDraws {
    pub accel: f64,
    pub steer: f64,
}

/// One Euler step of the noisy unicycle. Acceleration noise is amplified by
/// `gravel_roughness` while on gravel; speed is clamped at zero.
pub fn vehicle_step(
    state: &VehicleState,
    control: Control,
    params: &ScenarioParams,
    noise: NoiseDraws,
) -> VehicleState {
    let dt = params.dt;
    let v = state.v;
    let sigma_a = if params.on_gravel(state.p_y) { params.sigma_a * params.gravel_roughness } else { params.sigma_a };
    VehicleState {
        p_x: state.p_x + v * state.theta.cos() * dt,
        p_y: state.p_y + v * state.theta.sin() * dt,
        v: (v + (control.accel + sigma_a * v * noise.accel) * dt).max(0.0),
        theta: state.theta + (control.steer + params.sigma_phi * v * noise.steer) * dt,
    }
}
