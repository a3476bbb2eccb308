//! Agent-population Monte Carlo counterpart of the ODE: each human carries a
//! concrete intention and revises it with a probability proportional to a
//! payoff excess.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsKind, DynamicsSpec};
use crate::game::{check_probability, GameError, Intent, PayoffRiskTable, StrategyPair};
use crate::policies::PolicySpec;
use crate::trajectory::{CrossingCounter, Sample, Simulator, Trajectory, TrajectoryMeta};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("flip probability {probability} exceeds 1 at step {step}; reduce the rate scale eta")]
    RateOverflow { step: u64, probability: f64 },
    #[error("population needs at least two agents, got {0}")]
    PopulationTooSmall(usize),
    #[error("rate scale eta must be finite and non-negative, got {0}")]
    InvalidEta(f64),
    #[error(transparent)]
    InvalidState(#[from] GameError),
}

/// Individual revision protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// Imitate a uniformly drawn other agent when it earns more.
    Replicator,
    /// Switch towards an intention that beats the population average.
    Bnn,
    /// Switch when the other intention beats one's own.
    Smith,
}

/// How mixed-dynamics agents are assigned to protocols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assignment {
    /// Group sizes are fixed, membership is redrawn every step.
    #[default]
    Reshuffled,
    /// Membership is drawn once and kept.
    Persistent,
}

/// Group sizes proportional to `weights` by largest-remainder rounding.
pub fn apportion(n: usize, weights: [f64; 3]) -> [usize; 3] {
    let quotas = weights.map(|w| w * n as f64);
    let mut sizes = quotas.map(|q| q.floor() as usize);
    let assigned: usize = sizes.iter().sum();
    let mut order = [0, 1, 2];
    // Stable sort keeps ties in replicator, BNN, Smith order.
    order.sort_by(|&i, &j| {
        let ri = quotas[i] - quotas[i].floor();
        let rj = quotas[j] - quotas[j].floor();
        rj.partial_cmp(&ri).expect("finite quotas")
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

fn protocol_layout(n: usize, dynamics: &DynamicsSpec) -> Vec<Protocol> {
    let sizes = match dynamics.kind() {
        DynamicsKind::Replicator => [n, 0, 0],
        DynamicsKind::Bnn => [0, n, 0],
        DynamicsKind::Smith => [0, 0, n],
        DynamicsKind::Mixed => apportion(n, dynamics.weights()),
    };
    let mut out = Vec::with_capacity(n);
    for (p, size) in [Protocol::Replicator, Protocol::Bnn, Protocol::Smith].into_iter().zip(sizes) {
        out.extend(std::iter::repeat_n(p, size));
    }
    out
}

fn shuffle(items: &mut [Protocol], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// A fixed-size population of humans, each with a current intention.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    intentions: Vec<Intent>,
    protocols: Vec<Protocol>,
    assignment: Assignment,
    seed: u64,
    step: u64,
}

/// Random-stream layout: stream `2k` feeds the agents at step `k`, each agent
/// `i` owning words `4i..4i+4`; stream `2k + 1` feeds the protocol shuffle.
/// Any agent's draws can therefore be regenerated in isolation.
fn agent_stream(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * step);
    rng
}

fn shuffle_stream(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * step + 1);
    rng
}

/// Uniform in `[0, 1)` from the top 53 bits.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl Population {
    /// `round(n * pi_h_0)` cooperators; protocols per `dynamics`.
    pub fn new(
        n: usize,
        pi_h_0: f64,
        dynamics: &DynamicsSpec,
        assignment: Assignment,
        seed: u64,
    ) -> Result<Self, McError> {
        if n < 2 {
            return Err(McError::PopulationTooSmall(n));
        }
        check_probability("pi_h_0", pi_h_0)?;
        let cooperators = (n as f64 * pi_h_0).round() as usize;
        let intentions = (0..n).map(|i| if i < cooperators { Intent::Cooperate } else { Intent::Defect }).collect();
        let mut protocols = protocol_layout(n, dynamics);
        // Initial placement is shuffled either way so that intentions and
        // protocols start independent.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        shuffle(&mut protocols, &mut rng);
        Ok(Population { intentions, protocols, assignment, seed, step: 0 })
    }

    pub fn len(&self) -> usize {
        self.intentions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intentions.is_empty()
    }

    pub fn cooperators(&self) -> usize {
        self.intentions.iter().filter(|&&i| i == Intent::Cooperate).count()
    }

    pub fn cooperator_fraction(&self) -> f64 {
        self.cooperators() as f64 / self.len() as f64
    }

    pub fn intentions(&self) -> &[Intent] {
        &self.intentions
    }

    pub fn protocols(&self) -> &[Protocol] {
        &self.protocols
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}

/// Per-intention flip probabilities of one protocol.
#[derive(Clone, Copy, Debug)]
struct FlipProbabilities {
    /// C to D for BNN/Smith; for the replicator, the probability of adopting
    /// a drawn partner's intention when it differs.
    from_c: f64,
    from_d: f64,
}

/// Advances the population by one synchronous revision round.
pub fn mc_update_step(pop: &mut Population, pi_a: f64, table: &PayoffRiskTable, eta: f64) -> Result<(), McError> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(McError::InvalidEta(eta));
    }
    check_probability("pi_a", pi_a)?;
    let n = pop.len();
    let cooperators = pop.cooperators();
    let h = cooperators as f64 / n as f64;
    let theta_c = table.conditional_reward(Intent::Cooperate, pi_a);
    let theta_d = table.conditional_reward(Intent::Defect, pi_a);
    let theta_bar = h * theta_c + (1.0 - h) * theta_d;
    let pos = |q: f64| q.max(0.0);

    let replicator = FlipProbabilities { from_c: eta * pos(theta_d - theta_c), from_d: eta * pos(theta_c - theta_d) };
    let bnn = FlipProbabilities { from_c: eta * pos(theta_d - theta_bar), from_d: eta * pos(theta_c - theta_bar) };
    let smith = replicator;
    for p in [replicator, bnn] {
        for prob in [p.from_c, p.from_d] {
            if prob > 1.0 {
                return Err(McError::RateOverflow { step: pop.step, probability: prob });
            }
        }
    }

    if pop.assignment == Assignment::Reshuffled {
        shuffle(&mut pop.protocols, &mut shuffle_stream(pop.seed, pop.step));
    }

    let mut rng = agent_stream(pop.seed, pop.step);
    let before = pop.intentions.clone();
    let partners = (n - 1) as u128;
    for (i, (intent, protocol)) in pop.intentions.iter_mut().zip(&pop.protocols).enumerate() {
        let partner_draw = rng.next_u64();
        let flip_draw = unit(rng.next_u64());
        let flip = match protocol {
            Protocol::Replicator => {
                // Multiply-shift maps the draw onto the n - 1 other agents.
                let mut j = ((partner_draw as u128 * partners) >> 64) as usize;
                if j >= i {
                    j += 1;
                }
                if before[j] == *intent {
                    false
                } else {
                    let p = match intent {
                        Intent::Cooperate => replicator.from_c,
                        Intent::Defect => replicator.from_d,
                    };
                    flip_draw < p
                }
            }
            Protocol::Bnn | Protocol::Smith => {
                let probs = if *protocol == Protocol::Bnn { bnn } else { smith };
                let p = match intent {
                    Intent::Cooperate => probs.from_c,
                    Intent::Defect => probs.from_d,
                };
                flip_draw < p
            }
        };
        if flip {
            *intent = intent.flipped();
        }
    }
    pop.step += 1;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    pub n: usize,
    pub steps: u64,
    /// Flip-probability scale; also the strategy-time advanced per step.
    pub eta: f64,
    pub seed: u64,
    pub record_every: u64,
    pub assignment: Assignment,
}

impl McOptions {
    /// `eta = dt / spread`, so flip probabilities never exceed `dt`.
    pub fn eta_for(table: &PayoffRiskTable, dt: f64) -> f64 {
        dt / table.reward_spread()
    }
}

/// Runs a population against `policy`; sample `k` sits at strategy-time `k * eta`.
pub fn simulate_mc(
    table: &PayoffRiskTable,
    dynamics: &DynamicsSpec,
    policy: &PolicySpec,
    pi_h_0: f64,
    opts: McOptions,
) -> Result<Trajectory, McError> {
    let mut pop = Population::new(opts.n, pi_h_0, dynamics, opts.assignment, opts.seed)?;
    let record_every = opts.record_every.max(1);
    let threshold = table.msne_threshold();
    let mut crossings = CrossingCounter::default();
    let state = |h: f64| StrategyPair::new(h, policy.action(h)).expect("fractions are probabilities");
    let mut samples = Vec::with_capacity((opts.steps / record_every + 2) as usize);
    let mut h = pop.cooperator_fraction();
    samples.push(Sample::new(0.0, state(h), table));
    crossings.observe(policy.action(h), threshold);
    for k in 1..=opts.steps {
        mc_update_step(&mut pop, policy.action(h), table, opts.eta)?;
        h = pop.cooperator_fraction();
        crossings.observe(policy.action(h), threshold);
        if k % record_every == 0 || k == opts.steps {
            samples.push(Sample::new(k as f64 * opts.eta, state(h), table));
        }
    }
    Ok(Trajectory {
        meta: TrajectoryMeta {
            simulator: Simulator::MonteCarlo,
            table: table.raw(),
            dynamics: *dynamics,
            policy: *policy,
            dt: opts.eta,
            steps: opts.steps,
            record_every,
            seed: Some(opts.seed),
            population: Some(opts.n),
            clamp_activations: 0,
            branch_crossings: crossings.count,
        },
        samples,
    })
}
