//! Human strategy dynamics: the rate of change of the human cooperation
//! probability under replicator, BNN, Smith and mixed revision protocols.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Intent, PayoffRiskTable, StrategyPair};

/// Tolerance on `w_r + w_b + w_s = 1` for mixed dynamics.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsKind {
    Replicator,
    Bnn,
    Smith,
    Mixed,
}

impl DynamicsKind {
    pub const ALL: [DynamicsKind; 4] =
        [DynamicsKind::Replicator, DynamicsKind::Bnn, DynamicsKind::Smith, DynamicsKind::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            DynamicsKind::Replicator => "replicator",
            DynamicsKind::Bnn => "bnn",
            DynamicsKind::Smith => "smith",
            DynamicsKind::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dynamics weights must be finite and non-negative, got ({w_r}, {w_b}, {w_s})")]
    NegativeWeight { w_r: f64, w_b: f64, w_s: f64 },
    #[error("mixed dynamics weights must sum to 1, got {sum}")]
    WeightSum { sum: f64 },
    #[error("{kind} dynamics cannot carry custom weights")]
    PureKindWeights { kind: &'static str },
}

/// Which revision protocol the human population follows, with the weights
/// `(w_r, w_b, w_s)` of the replicator, BNN and Smith components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDynamics", into = "RawDynamics")]
pub struct DynamicsSpec {
    kind: DynamicsKind,
    w_r: f64,
    w_b: f64,
    w_s: f64,
}

/// Config-file shape: `kind`, plus `weights = [w_r, w_b, w_s]` for mixed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    kind: DynamicsKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<[f64; 3]>,
}

impl TryFrom<RawDynamics> for DynamicsSpec {
    type Error = DynamicsError;

    fn try_from(raw: RawDynamics) -> Result<Self, Self::Error> {
        match (raw.kind, raw.weights) {
            (DynamicsKind::Mixed, None) => Ok(DynamicsSpec::uniform_mixed()),
            (DynamicsKind::Mixed, Some([w_r, w_b, w_s])) => DynamicsSpec::mixed(w_r, w_b, w_s),
            (kind, None) => Ok(DynamicsSpec::pure(kind)),
            (kind, Some(w)) => {
                let pure = DynamicsSpec::pure(kind);
                if w == [pure.w_r, pure.w_b, pure.w_s] {
                    Ok(pure)
                } else {
                    Err(DynamicsError::PureKindWeights { kind: kind.name() })
                }
            }
        }
    }
}

impl From<DynamicsSpec> for RawDynamics {
    fn from(spec: DynamicsSpec) -> Self {
        let weights = (spec.kind == DynamicsKind::Mixed).then_some([spec.w_r, spec.w_b, spec.w_s]);
        RawDynamics { kind: spec.kind, weights }
    }
}

impl DynamicsSpec {
    pub fn replicator() -> Self {
        DynamicsSpec { kind: DynamicsKind::Replicator, w_r: 1.0, w_b: 0.0, w_s: 0.0 }
    }

    pub fn bnn() -> Self {
        DynamicsSpec { kind: DynamicsKind::Bnn, w_r: 0.0, w_b: 1.0, w_s: 0.0 }
    }

    pub fn smith() -> Self {
        DynamicsSpec { kind: DynamicsKind::Smith, w_r: 0.0, w_b: 0.0, w_s: 1.0 }
    }

    /// Mixed dynamics with equal weights.
    pub fn uniform_mixed() -> Self {
        let third = 1.0 / 3.0;
        DynamicsSpec { kind: DynamicsKind::Mixed, w_r: third, w_b: third, w_s: third }
    }

    /// The canonical spec of a kind; mixed gets equal weights.
    pub fn pure(kind: DynamicsKind) -> Self {
        match kind {
            DynamicsKind::Replicator => Self::replicator(),
            DynamicsKind::Bnn => Self::bnn(),
            DynamicsKind::Smith => Self::smith(),
            DynamicsKind::Mixed => Self::uniform_mixed(),
        }
    }

    pub fn mixed(w_r: f64, w_b: f64, w_s: f64) -> Result<Self, DynamicsError> {
        let ws = [w_r, w_b, w_s];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DynamicsError::NegativeWeight { w_r, w_b, w_s });
        }
        let sum = w_r + w_b + w_s;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(DynamicsError::WeightSum { sum });
        }
        Ok(DynamicsSpec { kind: DynamicsKind::Mixed, w_r, w_b, w_s })
    }

    pub fn kind(&self) -> DynamicsKind {
        self.kind
    }

    /// `(w_r, w_b, w_s)`
    pub fn weights(&self) -> [f64; 3] {
        [self.w_r, self.w_b, self.w_s]
    }
}

/// Advantage of cooperating over defecting for a human facing an autonomous
/// agent that cooperates with probability `pi_a`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Alpha(pub f64);

/// `alpha = r_cd - r_dd + pi_a (r_cc + r_dd - r_cd - r_dc)`.
///
/// Evaluated as `denominator * (pi_a - L)`, which is algebraically identical
/// but keeps the sign exact: it vanishes precisely at `pi_a == L`.
pub fn alpha(pi_a: f64, table: &PayoffRiskTable) -> Alpha {
    Alpha(table.denominator() * (pi_a - table.msne_threshold()))
}

/// Closed piecewise form of the human strategy derivative.
pub fn rate(spec: &DynamicsSpec, pi: StrategyPair, table: &PayoffRiskTable) -> f64 {
    rate_unchecked(spec, pi.pi_h(), pi.pi_a(), table)
}

/// [`rate`] without the probability check on `pi_h`; outside `[0, 1]` it is
/// the polynomial continuation of the active branch. Integrators use it for
/// intermediate stage states.
pub fn rate_unchecked(spec: &DynamicsSpec, h: f64, pi_a: f64, table: &PayoffRiskTable) -> f64 {
    let Alpha(a) = alpha(pi_a, table);
    let replicator = h * (1.0 - h);
    if a > 0.0 {
        a * (spec.w_r * replicator + spec.w_s * (1.0 - h) + spec.w_b * (1.0 - h) * (1.0 - h))
    } else if a < 0.0 {
        a * (spec.w_r * replicator + spec.w_s * h + spec.w_b * h * h)
    } else {
        0.0
    }
}

fn pos(q: f64) -> f64 {
    q.max(0.0)
}

/// The revision protocols written directly in terms of conditional rewards.
/// Kept as an independent oracle for [`rate`].
pub fn rate_generic(spec: &DynamicsSpec, pi: StrategyPair, table: &PayoffRiskTable) -> f64 {
    let h = pi.pi_h();
    let theta_c = table.conditional_reward(Intent::Cooperate, pi.pi_a());
    let theta_d = table.conditional_reward(Intent::Defect, pi.pi_a());
    let theta_bar = h * theta_c + (1.0 - h) * theta_d;

    let replicator = h * (theta_c - theta_bar);
    let bnn = pos(theta_c - theta_bar) - h * (pos(theta_c - theta_bar) + pos(theta_d - theta_bar));
    let smith = (1.0 - h) * pos(theta_c - theta_d) - h * pos(theta_d - theta_c);
    spec.w_r * replicator + spec.w_b * bnn + spec.w_s * smith
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Preset;

    fn pair(h: f64, a: f64) -> StrategyPair {
        StrategyPair::new(h, a).unwrap()
    }

    #[test]
    fn alpha_vanishes_at_threshold() {
        for p in Preset::ALL {
            let t = p.table();
            assert_eq!(alpha(t.msne_threshold(), &t).0, 0.0);
        }
    }

    #[test]
    fn alpha_at_pure_strategies() {
        let t = Preset::TypeA.table();
        assert!((alpha(1.0, &t).0 - (-31.29)).abs() < 1e-9);
        assert!((alpha(0.0, &t).0 - 87.16).abs() < 1e-9);
    }

    #[test]
    fn alpha_matches_expanded_definition() {
        let t = Preset::TypeB.table();
        for i in 0..=20 {
            let a = i as f64 / 20.0;
            let expanded = t.r_cd() - t.r_dd() + a * (t.r_cc() + t.r_dd() - t.r_cd() - t.r_dc());
            assert!((alpha(a, &t).0 - expanded).abs() < 1e-10);
        }
    }

    #[test]
    fn replicator_fixed_at_pure_humans() {
        let t = Preset::TypeC.table();
        for a in [0.0, 0.3, 1.0] {
            assert_eq!(rate(&DynamicsSpec::replicator(), pair(0.0, a), &t), 0.0);
            assert_eq!(rate(&DynamicsSpec::replicator(), pair(1.0, a), &t), 0.0);
        }
    }

    #[test]
    fn uniform_mixed_at_half_against_full_cooperation() {
        let t = Preset::TypeA.table();
        let spec = DynamicsSpec::uniform_mixed();
        let r = rate(&spec, pair(0.5, 1.0), &t);
        assert!((r - (-31.29 / 3.0)).abs() < 1e-9, "{r}");
        assert!((r - rate_generic(&spec, pair(0.5, 1.0), &t)).abs() < 1e-12);
    }

    #[test]
    fn smith_is_still_at_threshold() {
        let t = Preset::TypeD.table();
        let l = t.msne_threshold();
        for h in [0.0, 0.2, 0.9, 1.0] {
            assert_eq!(rate(&DynamicsSpec::smith(), pair(h, l), &t), 0.0);
        }
    }

    #[test]
    fn mixed_weights_are_validated() {
        assert!(DynamicsSpec::mixed(0.5, 0.5, 0.0).is_ok());
        assert!(matches!(DynamicsSpec::mixed(0.5, 0.6, 0.0), Err(DynamicsError::WeightSum { .. })));
        assert!(matches!(DynamicsSpec::mixed(1.5, -0.5, 0.0), Err(DynamicsError::NegativeWeight { .. })));
    }

    #[test]
    fn pure_kinds_carry_unit_weight() {
        assert_eq!(DynamicsSpec::replicator().weights(), [1.0, 0.0, 0.0]);
        assert_eq!(DynamicsSpec::bnn().weights(), [0.0, 1.0, 0.0]);
        assert_eq!(DynamicsSpec::smith().weights(), [0.0, 0.0, 1.0]);
    }
}
