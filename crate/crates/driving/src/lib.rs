//! Two vehicles meeting on a road barely wide enough for both. Sampling the
//! four intention pairs yields a reward/risk table for the game model.

mod episode;
mod estimate;
mod params;
mod vehicle;

pub use episode::{episode_rng, simulate_episode, EpisodeOutcome};
pub use estimate::{estimate_tables, sample_table, DrivingError, Estimate, TableEstimate};
pub use params::{ParameterError, ScenarioParams};
pub use vehicle::{vehicle_step, Control, NoiseDraws, VehicleState};
