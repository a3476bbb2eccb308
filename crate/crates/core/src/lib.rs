//! Strategic human–machine interaction games.
//!
//! A human population revises its cooperation probability `pi_h` under
//! replicator, BNN, Smith, or mixed dynamics while an autonomous agent picks
//! its own cooperation probability `pi_a` through a policy. The crate covers
//! the payoff/risk game itself ([`game`]), the revision dynamics
//! ([`dynamics`]), the policies and their admissible/feasible strategy sets
//! ([`policies`]), and two simulators: a deterministic RK4 integrator
//! ([`ode`]) and an agent-population Monte Carlo ([`mc`]).

pub mod dynamics;
pub mod game;
pub mod mc;
pub mod ode;
pub mod policies;
pub mod trajectory;

pub use dynamics::{alpha, rate, rate_generic, rate_unchecked, Alpha, DynamicsKind, DynamicsSpec};
pub use game::{
    validate_table, GameError, Intent, InteractionType, PayoffRiskTable, Preset, RawTable, RewardCase, RiskCase,
    StrategyPair,
};
pub use mc::{mc_update_step, simulate_mc, Assignment, McError, McOptions, Population};
pub use ode::{integrate_until, rk4_step, simulate_ode, ClosedLoop, OdeError, OdeOptions};
pub use policies::{
    admissible_set, feasible_set, optimal_strategy, Branch, Interval, OptimalStrategy, PolicyError, PolicyKind,
    PolicySpec, Segment, SegmentKind, SegmentSet,
};
pub use trajectory::{Sample, Simulator, Trajectory, TrajectoryMeta};
