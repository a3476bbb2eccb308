//! Fixed-step RK4 integration of the closed loop between the human strategy
//! dynamics and an agent policy.

use thiserror::Error;

use crate::dynamics::{rate_unchecked, DynamicsSpec};
use crate::game::{check_probability, GameError, PayoffRiskTable, StrategyPair};
use crate::policies::PolicySpec;
use crate::trajectory::{CrossingCounter, Sample, Simulator, Trajectory, TrajectoryMeta};

/// Default step size in strategy-time.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default number of steps.
pub const DEFAULT_STEPS: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("human strategy became non-finite ({value}) at step {step}")]
    NonFiniteState { step: u64, value: f64 },
    #[error("step size must be finite and positive, got {0}")]
    InvalidStep(f64),
    #[error("at least one step is required")]
    NoSteps,
    #[error(transparent)]
    InvalidInitialState(#[from] GameError),
}

/// Human dynamics coupled to an agent policy that reacts instantly to `pi_h`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedLoop<'a> {
    pub table: &'a PayoffRiskTable,
    pub dynamics: &'a DynamicsSpec,
    pub policy: &'a PolicySpec,
}

impl ClosedLoop<'_> {
    /// Agent response to `pi_h`, extended to out-of-range stage states by
    /// clamping the observation.
    pub fn action(&self, pi_h: f64) -> f64 {
        self.policy.action(pi_h.clamp(0.0, 1.0))
    }

    /// Right-hand side `d pi_h / dt` with the agent action recomputed from `pi_h`.
    pub fn rate(&self, pi_h: f64) -> f64 {
        rate_unchecked(self.dynamics, pi_h, self.action(pi_h), self.table)
    }

    pub fn state(&self, pi_h: f64) -> StrategyPair {
        StrategyPair::new(pi_h, self.action(pi_h)).expect("clamped states are probabilities")
    }

    /// Largest finite-difference slope of the right-hand side over a grid of
    /// `[0, 1]`; a proxy for the Lipschitz constant used to pick stable steps.
    pub fn lipschitz_estimate(&self) -> f64 {
        const N: usize = 4000;
        let step = 1.0 / N as f64;
        let mut prev = self.rate(0.0);
        let mut worst: f64 = 0.0;
        for i in 1..=N {
            let h = i as f64 * step;
            let r = self.rate(h);
            worst = worst.max((r - prev).abs() / step);
            prev = r;
        }
        worst
    }

    /// A step size of `safety / Lipschitz`, capped at `max_dt`.
    pub fn stable_dt(&self, safety: f64, max_dt: f64) -> f64 {
        let lip = self.lipschitz_estimate();
        if lip > 0.0 {
            (safety / lip).min(max_dt)
        } else {
            max_dt
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult {
    pub pi_h: f64,
    /// The raw update left `[0, 1]` and was clamped.
    pub clamped: bool,
}

/// One classical RK4 step; stage states may leave `[0, 1]`, the result may not.
pub fn rk4_step(system: &ClosedLoop, pi_h: f64, dt: f64) -> StepResult {
    let k1 = system.rate(pi_h);
    let k2 = system.rate(pi_h + 0.5 * dt * k1);
    let k3 = system.rate(pi_h + 0.5 * dt * k2);
    let k4 = system.rate(pi_h + dt * k3);
    let next = pi_h + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    let clamped_value = next.clamp(0.0, 1.0);
    StepResult { pi_h: clamped_value, clamped: clamped_value != next }
}

fn checked_step(system: &ClosedLoop, pi_h: f64, dt: f64, step: u64) -> Result<StepResult, OdeError> {
    let res = rk4_step(system, pi_h, dt);
    if res.pi_h.is_finite() {
        Ok(res)
    } else {
        Err(OdeError::NonFiniteState { step, value: res.pi_h })
    }
}

fn check_dt(dt: f64) -> Result<(), OdeError> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(OdeError::InvalidStep(dt))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub dt: f64,
    pub steps: u64,
    /// Record every n-th step; the final step is always recorded.
    pub record_every: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { dt: DEFAULT_DT, steps: DEFAULT_STEPS, record_every: 1 }
    }
}

/// Integrates from `pi_h_0`, returning `steps + 1` samples when every step is recorded.
pub fn simulate_ode(system: &ClosedLoop, pi_h_0: f64, opts: OdeOptions) -> Result<Trajectory, OdeError> {
    check_probability("pi_h_0", pi_h_0)?;
    check_dt(opts.dt)?;
    if opts.steps == 0 {
        return Err(OdeError::NoSteps);
    }
    let record_every = opts.record_every.max(1);
    let threshold = system.table.msne_threshold();
    let mut samples = Vec::with_capacity((opts.steps / record_every + 2) as usize);
    let mut crossings = CrossingCounter::default();
    let mut clamps = 0;
    let mut h = pi_h_0;
    samples.push(Sample::new(0.0, system.state(h), system.table));
    crossings.observe(system.action(h), threshold);
    for k in 1..=opts.steps {
        let res = checked_step(system, h, opts.dt, k)?;
        h = res.pi_h;
        clamps += u64::from(res.clamped);
        crossings.observe(system.action(h), threshold);
        if k % record_every == 0 || k == opts.steps {
            samples.push(Sample::new(k as f64 * opts.dt, system.state(h), system.table));
        }
    }
    Ok(Trajectory {
        meta: TrajectoryMeta {
            simulator: Simulator::Ode,
            table: system.table.raw(),
            dynamics: *system.dynamics,
            policy: *system.policy,
            dt: opts.dt,
            steps: opts.steps,
            record_every,
            seed: None,
            population: None,
            clamp_activations: clamps,
            branch_crossings: crossings.count,
        },
        samples,
    })
}

/// Endpoint of [`integrate_until`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settled {
    pub state: StrategyPair,
    pub steps: u64,
    pub time: f64,
    pub converged: bool,
    pub clamp_activations: u64,
    pub branch_crossings: u64,
}

/// Integrates until `done(state)` holds (tested every `check_every` steps)
/// or `max_steps` is exhausted. Used for horizons that are too long to record.
pub fn integrate_until(
    system: &ClosedLoop,
    pi_h_0: f64,
    dt: f64,
    max_steps: u64,
    check_every: u64,
    mut done: impl FnMut(StrategyPair) -> bool,
) -> Result<Settled, OdeError> {
    check_probability("pi_h_0", pi_h_0)?;
    check_dt(dt)?;
    let check_every = check_every.max(1);
    let threshold = system.table.msne_threshold();
    let mut crossings = CrossingCounter::default();
    let mut clamps = 0;
    let mut h = pi_h_0;
    crossings.observe(system.action(h), threshold);
    let mut k = 0;
    let mut converged = done(system.state(h));
    while !converged && k < max_steps {
        k += 1;
        let res = checked_step(system, h, dt, k)?;
        h = res.pi_h;
        clamps += u64::from(res.clamped);
        crossings.observe(system.action(h), threshold);
        if k % check_every == 0 || k == max_steps {
            converged = done(system.state(h));
        }
    }
    Ok(Settled {
        state: system.state(h),
        steps: k,
        time: k as f64 * dt,
        converged,
        clamp_activations: clamps,
        branch_crossings: crossings.count,
    })
}
