//! Autonomous-agent policies and the set machinery behind the proposed one:
//! the admissible set where human strategies stop moving, its risk-feasible
//! subset, and the reward-optimal point inside it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{PayoffRiskTable, StrategyPair};

/// Rewards closer than this are treated as tied by [`optimal_strategy`].
pub const REWARD_TIE_TOLERANCE: f64 = 1e-12;

/// Inward displacement used when a supremum on an open segment is not attained.
pub const OPEN_ENDPOINT_OFFSET: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("tolerable risk {epsilon} is below every admissible risk (smallest is {min_admissible_risk})")]
    InfeasibleTolerance { epsilon: f64, min_admissible_risk: f64 },
    #[error("tolerable risk must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("feedback gain must be finite and strictly positive, got {0}")]
    InvalidGain(f64),
}

/// A sub-interval of `[0, 1]` with explicit endpoint inclusion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn with_lower(self, lo: f64) -> Self {
        if lo > self.lo {
            Interval { lo, lo_closed: true, ..self }
        } else {
            self
        }
    }

    fn with_upper(self, hi: f64) -> Self {
        if hi < self.hi {
            Interval { hi, hi_closed: true, ..self }
        } else {
            self
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

/// Which of the three admissible pieces a segment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Humans always defect (`pi_h = 0`); `pi_a` ranges over the interval.
    AllDefect,
    /// Humans always cooperate (`pi_h = 1`); `pi_a` ranges over the interval.
    AllCooperate,
    /// The agent sits at the threshold (`pi_a = L`); `pi_h` ranges over the interval.
    Threshold,
}

/// One straight piece of the admissible set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Range of the free coordinate (`pi_a` on the edges, `pi_h` on the threshold line).
    pub interval: Interval,
    /// Value of the fixed coordinate.
    pub level: f64,
}

impl Segment {
    /// Point on the segment at free coordinate `x`.
    pub fn point(&self, x: f64) -> StrategyPair {
        let (h, a) = match self.kind {
            SegmentKind::AllDefect | SegmentKind::AllCooperate => (self.level, x),
            SegmentKind::Threshold => (x, self.level),
        };
        StrategyPair::new(h, a).expect("segment coordinates lie in [0, 1]")
    }

    pub fn contains(&self, pi: StrategyPair) -> bool {
        let (fixed, free) = match self.kind {
            SegmentKind::AllDefect | SegmentKind::AllCooperate => (pi.pi_h(), pi.pi_a()),
            SegmentKind::Threshold => (pi.pi_a(), pi.pi_h()),
        };
        fixed == self.level && self.interval.contains(free)
    }

    /// Expected risk along the segment is `w0 + slope * x`; returns `(w0, slope)`.
    fn risk_line(&self, table: &PayoffRiskTable) -> (f64, f64) {
        let (w_cc, w_cd, w_dd) = (table.w_cc(), table.w_cd(), table.w_dd());
        match self.kind {
            SegmentKind::AllDefect => (w_dd, w_cd - w_dd),
            SegmentKind::AllCooperate => (w_cd, w_cc - w_cd),
            SegmentKind::Threshold => {
                let l = self.level;
                let w0 = w_cd * l + w_dd * (1.0 - l);
                (w0, w_cc * l + w_cd - 2.0 * w_cd * l - w_dd * (1.0 - l))
            }
        }
    }
}

/// A union of admissible segments; empty pieces are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
}

impl SegmentSet {
    pub fn contains(&self, pi: StrategyPair) -> bool {
        self.segments.iter().any(|s| s.contains(pi))
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segment(&self, kind: SegmentKind) -> Option<&Segment> {
        self.segments.iter().find(|s| s.kind == kind)
    }
}

/// Strategy pairs at which the human strategy is stationary under any of the
/// supported dynamics with a non-zero BNN or Smith component.
pub fn admissible_set(table: &PayoffRiskTable) -> SegmentSet {
    let l = table.msne_threshold();
    SegmentSet {
        segments: vec![
            Segment {
                kind: SegmentKind::AllDefect,
                interval: Interval { lo: l, hi: 1.0, lo_closed: false, hi_closed: true },
                level: 0.0,
            },
            Segment {
                kind: SegmentKind::AllCooperate,
                interval: Interval { lo: 0.0, hi: l, lo_closed: true, hi_closed: false },
                level: 1.0,
            },
            Segment { kind: SegmentKind::Threshold, interval: Interval::closed(0.0, 1.0), level: l },
        ],
    }
}

/// Admissible pairs whose expected risk is at most `epsilon`.
///
/// Each segment is cut by the half-line `slope * x <= epsilon - w0`; finite
/// bounds are then nudged inward until the endpoint itself evaluates as
/// feasible in floating point.
pub fn feasible_set(table: &PayoffRiskTable, epsilon: f64) -> Result<SegmentSet, PolicyError> {
    check_epsilon(epsilon)?;
    let admissible = admissible_set(table);
    let mut segments = Vec::new();
    for seg in &admissible.segments {
        let (w0, slope) = seg.risk_line(table);
        let rhs = epsilon - w0;
        let cut = if slope > 0.0 {
            let bound = rhs / slope;
            let mut upper = seg.interval.with_upper(bound);
            if upper.hi_closed && upper.hi >= upper.lo {
                upper.hi = tighten(table, seg, upper.hi, -1.0, epsilon);
            }
            Some(upper)
        } else if slope < 0.0 {
            let bound = rhs / slope;
            let mut lower = seg.interval.with_lower(bound);
            if lower.lo_closed && lower.lo <= lower.hi {
                lower.lo = tighten(table, seg, lower.lo, 1.0, epsilon);
            }
            Some(lower)
        } else {
            (rhs >= 0.0).then_some(seg.interval)
        };
        if let Some(interval) = cut.filter(|i| !i.is_empty()) {
            segments.push(Segment { interval, ..*seg });
        }
    }
    if segments.is_empty() {
        return Err(PolicyError::InfeasibleTolerance { epsilon, min_admissible_risk: min_admissible_risk(table) });
    }
    Ok(SegmentSet { segments })
}

/// Snaps a rounded bound to the outermost floating-point value whose risk
/// evaluates as feasible: first inward by a growing number of ulps until it
/// is feasible, then to the farthest feasible value within 64 ulps outward
/// (rounding makes the evaluated risk non-monotone at that scale). The
/// result may cross the other end of the interval, which then reads as empty.
fn tighten(table: &PayoffRiskTable, seg: &Segment, mut x: f64, inward: f64, epsilon: f64) -> f64 {
    let feasible = |x: f64| (0.0..=1.0).contains(&x) && table.expected_risk(seg.point(x)) <= epsilon;
    let outward = |x: f64| if inward > 0.0 { x.next_down() } else { x.next_up() };
    let mut step = f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
    while !feasible(x) && (0.0..=1.0).contains(&x) {
        x += inward * step;
        step *= 2.0;
    }
    if feasible(x) {
        let mut probe = x;
        for _ in 0..64 {
            probe = outward(probe);
            if feasible(probe) {
                x = probe;
            }
        }
    }
    x
}

/// Infimum of expected risk over the admissible set.
pub fn min_admissible_risk(table: &PayoffRiskTable) -> f64 {
    admissible_set(table)
        .segments
        .iter()
        .flat_map(|s| {
            let (w0, slope) = s.risk_line(table);
            [w0 + slope * s.interval.lo, w0 + slope * s.interval.hi]
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_epsilon(epsilon: f64) -> Result<(), PolicyError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(PolicyError::InvalidEpsilon(epsilon))
    }
}

/// Whether the optimum is tracked by feedback around the threshold line or
/// held by a constant agent strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Dynamic,
    Static,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalStrategy {
    pub point: StrategyPair,
    pub branch: Branch,
    pub segment: SegmentKind,
    /// False when the supremum lies on an excluded endpoint and `point` is
    /// displaced inward by [`OPEN_ENDPOINT_OFFSET`].
    pub attained: bool,
    pub expected_reward: f64,
    pub expected_risk: f64,
}

struct Candidate {
    point: StrategyPair,
    segment: SegmentKind,
    attained: bool,
    reward: f64,
    risk: f64,
}

/// Reward-maximising pair in the feasible set.
///
/// The objective is affine along every segment, so only segment endpoints
/// are examined. Ties within [`REWARD_TIE_TOLERANCE`] go to the lower risk,
/// then to the threshold line, then to the all-defect edge.
pub fn optimal_strategy(table: &PayoffRiskTable, epsilon: f64) -> Result<OptimalStrategy, PolicyError> {
    let feasible = feasible_set(table, epsilon)?;
    let threshold = feasible.segment(SegmentKind::Threshold);
    let mut candidates = Vec::new();
    for seg in &feasible.segments {
        let iv = seg.interval;
        for (x, closed, inward) in [(iv.lo, iv.lo_closed, 1.0), (iv.hi, iv.hi_closed, -1.0)] {
            let (point, attained) = if closed {
                (seg.point(x), true)
            } else {
                let limit = seg.point(x);
                if threshold.is_some_and(|t| t.contains(limit)) {
                    // Covered by the threshold segment's own endpoints.
                    continue;
                }
                (seg.point(x + inward * OPEN_ENDPOINT_OFFSET), false)
            };
            candidates.push(Candidate {
                point,
                segment: seg.kind,
                attained,
                reward: table.expected_total_reward(point),
                risk: table.expected_risk(point),
            });
        }
    }
    let preference = |k: SegmentKind| match k {
        SegmentKind::Threshold => 0,
        SegmentKind::AllDefect => 1,
        SegmentKind::AllCooperate => 2,
    };
    let best = candidates
        .into_iter()
        .reduce(|best, c| {
            let better = if (c.reward - best.reward).abs() > REWARD_TIE_TOLERANCE {
                c.reward > best.reward
            } else if c.risk != best.risk {
                c.risk < best.risk
            } else {
                preference(c.segment) < preference(best.segment)
            };
            if better {
                c
            } else {
                best
            }
        })
        .expect("a non-empty feasible set has at least one endpoint");
    Ok(OptimalStrategy {
        point: best.point,
        branch: if best.segment == SegmentKind::Threshold { Branch::Dynamic } else { Branch::Static },
        segment: best.segment,
        attained: best.attained,
        expected_reward: best.reward,
        expected_risk: best.risk,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Always cooperate.
    Dwsc,
    /// Hold the reward-only mixed equilibrium.
    Msne,
    /// Steer humans to the risk-constrained optimum.
    Proposed,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Dwsc => "dwsc",
            PolicyKind::Msne => "msne",
            PolicyKind::Proposed => "proposed",
        }
    }
}

/// An autonomous-agent policy with everything it needs precomputed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolicySpec {
    kind: PolicyKind,
    threshold: f64,
    proposed: Option<ProposedTarget>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProposedTarget {
    pub epsilon: f64,
    pub gain: f64,
    pub optimum: OptimalStrategy,
}

impl PolicySpec {
    pub fn dwsc(table: &PayoffRiskTable) -> Self {
        PolicySpec { kind: PolicyKind::Dwsc, threshold: table.msne_threshold(), proposed: None }
    }

    pub fn msne(table: &PayoffRiskTable) -> Self {
        PolicySpec { kind: PolicyKind::Msne, threshold: table.msne_threshold(), proposed: None }
    }

    pub fn proposed(table: &PayoffRiskTable, epsilon: f64, gain: f64) -> Result<Self, PolicyError> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(PolicyError::InvalidGain(gain));
        }
        let optimum = optimal_strategy(table, epsilon)?;
        Ok(PolicySpec {
            kind: PolicyKind::Proposed,
            threshold: table.msne_threshold(),
            proposed: Some(ProposedTarget { epsilon, gain, optimum }),
        })
    }

    /// Builds any kind; `epsilon` and `gain` are only read for the proposed policy.
    pub fn new(kind: PolicyKind, table: &PayoffRiskTable, epsilon: f64, gain: f64) -> Result<Self, PolicyError> {
        match kind {
            PolicyKind::Dwsc => Ok(Self::dwsc(table)),
            PolicyKind::Msne => Ok(Self::msne(table)),
            PolicyKind::Proposed => Self::proposed(table, epsilon, gain),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn target(&self) -> Option<&ProposedTarget> {
        self.proposed.as_ref()
    }

    /// Agent cooperation probability in response to the observed human strategy.
    pub fn action(&self, pi_h: f64) -> f64 {
        match (self.kind, &self.proposed) {
            (PolicyKind::Dwsc, _) => 1.0,
            (PolicyKind::Msne, _) => self.threshold,
            (PolicyKind::Proposed, Some(target)) => match target.optimum.branch {
                Branch::Dynamic => {
                    let feedback = target.gain * (target.optimum.point.pi_h() - pi_h);
                    (self.threshold - feedback).clamp(0.0, 1.0)
                }
                Branch::Static => target.optimum.point.pi_a(),
            },
            (PolicyKind::Proposed, None) => unreachable!("proposed policies always carry a target"),
        }
    }
}

/// Free-function form of [`PolicySpec::action`].
pub fn policy_action(spec: &PolicySpec, pi_h: f64) -> f64 {
    spec.action(pi_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Preset;

    fn pair(h: f64, a: f64) -> StrategyPair {
        StrategyPair::new(h, a).unwrap()
    }

    #[test]
    fn admissible_membership() {
        let t = Preset::TypeA.table();
        let adm = admissible_set(&t);
        let l = t.msne_threshold();
        assert!(adm.contains(pair(0.0, 1.0)));
        assert!(!adm.contains(pair(0.5, 1.0)));
        assert!(adm.contains(pair(0.5, l)));
        assert!(adm.contains(pair(1.0, 0.0)));
        assert!(!adm.contains(pair(0.0, 0.2)));
        assert!(!adm.contains(pair(1.0, 0.9)));
    }

    #[test]
    fn type_a_feasible_set() {
        let t = Preset::TypeA.table();
        let f = feasible_set(&t, 9e-4).unwrap();
        let l = t.msne_threshold();
        assert!(f.segment(SegmentKind::AllDefect).is_none());
        let f1 = f.segment(SegmentKind::AllCooperate).unwrap().interval;
        assert!((f1.lo - 0.6129).abs() < 1e-4 && f1.lo_closed);
        assert!(f1.hi == l && !f1.hi_closed);
        let fd = f.segment(SegmentKind::Threshold).unwrap().interval;
        assert!((fd.lo - 0.884).abs() < 1e-3 && fd.hi == 1.0);
    }

    #[test]
    fn vacuous_tolerance_keeps_admissible_set() {
        for p in Preset::ALL {
            let t = p.table();
            let eps = t.w_dd();
            assert_eq!(feasible_set(&t, eps).unwrap(), admissible_set(&t), "{}", p.name());
        }
    }

    #[test]
    fn tiny_tolerance_is_infeasible() {
        let t = Preset::TypeA.table();
        assert!(matches!(feasible_set(&t, 1e-6), Err(PolicyError::InfeasibleTolerance { .. })));
        assert!(matches!(optimal_strategy(&t, 1e-6), Err(PolicyError::InfeasibleTolerance { .. })));
    }

    #[test]
    fn epsilon_outside_unit_interval_is_rejected() {
        let t = Preset::TypeA.table();
        assert_eq!(feasible_set(&t, 0.0), Err(PolicyError::InvalidEpsilon(0.0)));
        assert_eq!(feasible_set(&t, 1.0), Err(PolicyError::InvalidEpsilon(1.0)));
    }

    #[test]
    fn type_a_optimum_is_dynamic_at_full_cooperation() {
        let t = Preset::TypeA.table();
        let opt = optimal_strategy(&t, 9e-4).unwrap();
        assert_eq!(opt.point, pair(1.0, t.msne_threshold()));
        assert_eq!(opt.branch, Branch::Dynamic);
        assert!(opt.attained);
        assert!((opt.expected_reward - 126.7168).abs() < 1e-3);
        assert!((opt.expected_risk - 8.6189e-4).abs() < 1e-7);
    }

    #[test]
    fn type_d_optimum_sits_on_an_off_diagonal_corner() {
        let t = Preset::TypeD.table();
        for eps in [t.w_dd(), 4.4e-4] {
            let opt = optimal_strategy(&t, eps).unwrap();
            assert_eq!(opt.point, pair(0.0, 1.0));
            assert_eq!(opt.branch, Branch::Static);
            assert!((opt.expected_reward - (t.r_cd() + t.r_dc())).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_feasible_set_is_the_optimum() {
        // L = 0.5 and the tolerance equals the risk at (1, L), the unique
        // admissible risk minimiser; all values are exact in binary.
        let t = crate::game::validate_table(crate::game::RawTable {
            r_cc: 3.0,
            r_cd: 1.0,
            r_dc: 4.0,
            r_dd: 0.0,
            w_cc: 0.25,
            w_cd: 0.5,
            w_dd: 0.75,
        })
        .unwrap();
        // Up to rounding of the risk evaluation: a sliver of a few ulps next
        // to (1, L) on the all-cooperate edge may also evaluate as feasible.
        let f = feasible_set(&t, 0.375).unwrap();
        let fd = f.segment(SegmentKind::Threshold).unwrap();
        assert_eq!(fd.interval, Interval::closed(1.0, 1.0));
        for seg in &f.segments {
            assert!((seg.point(seg.interval.lo).pi_a() - 0.5).abs() < 1e-12);
            assert!((seg.point(seg.interval.lo).pi_h() - 1.0).abs() < 1e-12);
        }
        let opt = optimal_strategy(&t, 0.375).unwrap();
        assert_eq!(opt.point, pair(1.0, 0.5));
        assert_eq!(opt.branch, Branch::Dynamic);
    }

    #[test]
    fn policy_actions() {
        let t = Preset::TypeA.table();
        let l = t.msne_threshold();
        assert_eq!(PolicySpec::dwsc(&t).action(0.3), 1.0);
        assert_eq!(PolicySpec::msne(&t).action(0.3), l);
        let p = PolicySpec::proposed(&t, 9e-4, 1.0).unwrap();
        assert_eq!(p.action(1.0), l);
        assert!((p.action(0.5) - (l - 0.5)).abs() < 1e-15);
        let steep = PolicySpec::proposed(&t, 9e-4, 10.0).unwrap();
        assert_eq!(steep.action(0.0), 0.0);
    }

    #[test]
    fn static_branch_holds_the_target_action() {
        let t = Preset::TypeB.table();
        let p = PolicySpec::proposed(&t, 1.4e-3, 1.0).unwrap();
        let opt = p.target().unwrap().optimum;
        assert_eq!(opt.branch, Branch::Static);
        assert!((opt.point.pi_a() - 0.461538).abs() < 1e-6);
        for h in [0.0, 0.4, 1.0] {
            assert_eq!(p.action(h), opt.point.pi_a());
        }
    }

    #[test]
    fn invalid_gain_is_rejected() {
        let t = Preset::TypeA.table();
        assert_eq!(PolicySpec::proposed(&t, 9e-4, 0.0), Err(PolicyError::InvalidGain(0.0)));
    }
}
