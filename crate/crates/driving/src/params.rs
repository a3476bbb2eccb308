use evosafe_core::Preset;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParameterError {
    #[error("parameter {name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("parameter {name} must be {requirement}, got {value}")]
    OutOfRange { name: &'static str, requirement: &'static str, value: f64 },
    #[error("speeds must satisfy nu3 < nu2 < nu1, got ({nu1}, {nu2}, {nu3})")]
    SpeedOrder { nu1: f64, nu2: f64, nu3: f64 },
    #[error("horizon must be at least one step")]
    EmptyHorizon,
}

/// Narrow-road scenario. Lateral positions are measured from the road centre
/// towards each vehicle's own shoulder; everything beyond
/// `paved_half_width` is gravel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Free speed when defecting (m/s).
    pub nu1: f64,
    /// Shared speed when both cooperate (m/s).
    pub nu2: f64,
    /// Gravel speed (m/s).
    pub nu3: f64,
    /// Speed-proportional acceleration noise.
    pub sigma_a: f64,
    /// Speed-proportional steering noise.
    pub sigma_phi: f64,
    /// Fuel charged per unit of positive commanded acceleration.
    pub fuel_cost: f64,
    pub dt: f64,
    /// Steps per episode.
    pub horizon: usize,
    /// Half-width of the paved surface (m).
    pub paved_half_width: f64,
    /// How far past the paved edge a yielding cooperator drives (m).
    pub gravel_offset: f64,
    /// Lateral gap a cooperator keeps per m/s of the other vehicle's speed (s).
    pub gap_gain: f64,
    /// Proportional speed-tracking gain (1/s).
    pub speed_gain: f64,
    /// Braking limit (m/s^2).
    pub max_brake: f64,
    /// Acceleration limit (m/s^2).
    pub max_accel: f64,
    /// Speed errors smaller than this are not corrected (m/s).
    pub speed_deadband: f64,
    /// Lateral-offset steering gain.
    pub lateral_gain: f64,
    /// Heading steering gain.
    pub heading_gain: f64,
    /// Steering-rate limit (rad/s).
    pub max_steer: f64,
    /// Multiplier on acceleration noise while on gravel.
    pub gravel_roughness: f64,
    /// Crash hazard per second per m/s of overspeed on gravel.
    pub kappa: f64,
}

/// Road and controller constants of each preset, in field order from
/// `paved_half_width` to `kappa` (`max_steer` excluded). Nothing pins these
/// down physically; they are fitted per preset so each sampled table lands
/// in its interaction type with every risk between 1e-4 and 5e-3, and so
/// risk grows with the noise scale.
#[rustfmt::skip]
const TUNING: [[f64; 11]; 4] = [
    [4.43, 1.78, 0.594, 2.14, 2.46, 3.52, 1.26, 0.101, 0.475, 4.33, 1.29e-4],
    [2.79, 0.91, 0.67, 0.298, 4.15, 2.8, 0.959, 0.158, 1.39, 7.8, 1.5e-5],
    [2.71, 0.994, 0.747, 0.744, 1.94, 3.26, 1.01, 0.896, 0.962, 1.06, 2.64e-4],
    [4.84, 0.632, 0.854, 2.18, 4.17, 2.59, 0.171, 0.567, 0.851, 2.59, 5.52e-5],
];

impl ScenarioParams {
    /// The scenario meant to produce a table of the given interaction type.
    pub fn preset(preset: Preset) -> Self {
        let (nu1, nu2, nu3, sigma, fuel_cost, tuning) = match preset {
            Preset::TypeA => (10.0, 6.5, 2.0, 0.08, 3.0, TUNING[0]),
            Preset::TypeB => (10.0, 6.0, 2.0, 0.15, 4.0, TUNING[1]),
            Preset::TypeC => (10.0, 6.0, 4.0, 0.08, 4.0, TUNING[2]),
            Preset::TypeD => (10.0, 8.0, 5.0, 0.2, 1.0, TUNING[3]),
        };
        let [paved_half_width, gravel_offset, gap_gain, speed_gain, max_brake, max_accel, speed_deadband, lateral_gain, heading_gain, gravel_roughness, kappa] =
            tuning;
        ScenarioParams {
            nu1,
            nu2,
            nu3,
            sigma_a: sigma,
            sigma_phi: sigma,
            fuel_cost,
            dt: 0.1,
            horizon: 100,
            paved_half_width,
            gravel_offset,
            gap_gain,
            speed_gain,
            max_brake,
            max_accel,
            speed_deadband,
            lateral_gain,
            heading_gain,
            max_steer: 1.0,
            gravel_roughness,
            kappa,
        }
    }

    pub fn validate(&self) -> Result<(), ParameterError> {
        let fields = [
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("nu3", self.nu3),
            ("sigma_a", self.sigma_a),
            ("sigma_phi", self.sigma_phi),
            ("fuel_cost", self.fuel_cost),
            ("dt", self.dt),
            ("paved_half_width", self.paved_half_width),
            ("gravel_offset", self.gravel_offset),
            ("gap_gain", self.gap_gain),
            ("speed_gain", self.speed_gain),
            ("max_brake", self.max_brake),
            ("max_accel", self.max_accel),
            ("speed_deadband", self.speed_deadband),
            ("lateral_gain", self.lateral_gain),
            ("heading_gain", self.heading_gain),
            ("max_steer", self.max_steer),
            ("gravel_roughness", self.gravel_roughness),
            ("kappa", self.kappa),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ParameterError::NonFinite { name, value });
            }
            if value < 0.0 {
                return Err(ParameterError::OutOfRange { name, requirement: "non-negative", value });
            }
        }
        for (name, value) in [("nu3", self.nu3), ("dt", self.dt), ("paved_half_width", self.paved_half_width)] {
            if value <= 0.0 {
                return Err(ParameterError::OutOfRange { name, requirement: "positive", value });
            }
        }
        if !(self.nu3 < self.nu2 && self.nu2 < self.nu1) {
            return Err(ParameterError::SpeedOrder { nu1: self.nu1, nu2: self.nu2, nu3: self.nu3 });
        }
        if self.horizon == 0 {
            return Err(ParameterError::EmptyHorizon);
        }
        Ok(())
    }

    pub fn on_gravel(&self, p_y: f64) -> bool {
        p_y > self.paved_half_width
    }

    /// Episode duration in seconds.
    pub fn duration(&self) -> f64 {
        self.horizon as f64 * self.dt
    }
}
