//! The symmetric two-intention game: rewards, latent risks, and the derived
//! quantities every other module builds on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single-interaction intention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intent {
    /// Conservative behaviour (`C`).
    Cooperate,
    /// Aggressive behaviour (`D`).
    Defect,
}

impl Intent {
    pub fn flipped(self) -> Self {
        match self {
            Intent::Cooperate => Intent::Defect,
            Intent::Defect => Intent::Cooperate,
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Intent::Cooperate => write!(f, "C"),
            Intent::Defect => write!(f, "D"),
        }
    }
}

/// The inequality a table failed to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assumption {
    /// `r_dd < r_cd`
    DefectDefectBelowCooperateDefect,
    /// `r_cc < r_dc`
    CooperateCooperateBelowDefectCooperate,
    /// `0 <= w <= 1` for the named risk entry.
    RiskIsProbability(&'static str),
    /// `0 < L < 1`
    ThresholdInterior,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::DefectDefectBelowCooperateDefect => write!(f, "r_dd < r_cd"),
            Assumption::CooperateCooperateBelowDefectCooperate => write!(f, "r_cc < r_dc"),
            Assumption::RiskIsProbability(name) => write!(f, "0 <= {name} <= 1"),
            Assumption::ThresholdInterior => write!(f, "0 < L < 1"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("table violates assumption {0}")]
    AssumptionViolation(Assumption),
    #[error("r_cc + r_dd - r_dc - r_cd is zero; the indifference threshold is undefined")]
    DegenerateDenominator,
    #[error("table entry {0} is not finite")]
    NonFinite(&'static str),
    #[error("table is outside the A-D taxonomy: {0}")]
    UnclassifiableTable(String),
    #[error("strategy component {name} = {value} is not a probability")]
    StrategyOutOfRange { name: &'static str, value: f64 },
    #[error("unknown table preset '{0}' (expected type_a, type_b, type_c or type_d)")]
    UnknownPreset(String),
}

/// Unvalidated table entries, exactly as they appear in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTable {
    pub r_cc: f64,
    pub r_cd: f64,
    pub r_dc: f64,
    pub r_dd: f64,
    pub w_cc: f64,
    pub w_cd: f64,
    pub w_dd: f64,
}

/// A validated reward and risk table.
///
/// `r_xy` is the expected reward of an agent playing `x` against `y`; the
/// cross risk `w_cd` doubles as `w_dc`. The indifference threshold `L` is
/// computed once at validation time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct PayoffRiskTable {
    raw: RawTable,
    threshold: f64,
}

impl TryFrom<RawTable> for PayoffRiskTable {
    type Error = GameError;

    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        validate_table(raw)
    }
}

impl From<PayoffRiskTable> for RawTable {
    fn from(table: PayoffRiskTable) -> Self {
        table.raw
    }
}

/// Checks the ordering assumptions and risk bounds and precomputes `L`.
pub fn validate_table(raw: RawTable) -> Result<PayoffRiskTable, GameError> {
    let entries = [
        ("r_cc", raw.r_cc),
        ("r_cd", raw.r_cd),
        ("r_dc", raw.r_dc),
        ("r_dd", raw.r_dd),
        ("w_cc", raw.w_cc),
        ("w_cd", raw.w_cd),
        ("w_dd", raw.w_dd),
    ];
    if let Some((name, _)) = entries.iter().find(|(_, v)| !v.is_finite()) {
        return Err(GameError::NonFinite(name));
    }
    let denominator = raw.r_cc + raw.r_dd - raw.r_dc - raw.r_cd;
    if denominator == 0.0 {
        return Err(GameError::DegenerateDenominator);
    }
    if raw.r_dd >= raw.r_cd {
        return Err(GameError::AssumptionViolation(Assumption::DefectDefectBelowCooperateDefect));
    }
    if raw.r_cc >= raw.r_dc {
        return Err(GameError::AssumptionViolation(Assumption::CooperateCooperateBelowDefectCooperate));
    }
    for (name, w) in &entries[4..] {
        if !(0.0..=1.0).contains(w) {
            return Err(GameError::AssumptionViolation(Assumption::RiskIsProbability(name)));
        }
    }
    let threshold = (raw.r_dd - raw.r_cd) / denominator;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(GameError::AssumptionViolation(Assumption::ThresholdInterior));
    }
    Ok(PayoffRiskTable { raw, threshold })
}

/// Ordering of the reward entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardCase {
    /// `2 r_cc > r_cd + r_dc > 2 r_dd`
    MutualCooperationBest,
    /// `r_cd + r_dc > 2 r_cc > 2 r_dd`
    MixedPairBest,
}

/// Ordering of the risk entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskCase {
    /// `w_cc < w_cd < w_dd`
    MutualCooperationSafest,
    /// `w_cd < w_cc < w_dd`
    MixedPairSafest,
}

/// The four qualitative interaction regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionType {
    A,
    B,
    C,
    D,
}

impl InteractionType {
    pub fn from_cases(reward: RewardCase, risk: RiskCase) -> Self {
        use RewardCase::*;
        use RiskCase::*;
        match (reward, risk) {
            (MutualCooperationBest, MutualCooperationSafest) => InteractionType::A,
            (MutualCooperationBest, MixedPairSafest) => InteractionType::B,
            (MixedPairBest, MutualCooperationSafest) => InteractionType::C,
            (MixedPairBest, MixedPairSafest) => InteractionType::D,
        }
    }

    pub fn reward_case(self) -> RewardCase {
        match self {
            InteractionType::A | InteractionType::B => RewardCase::MutualCooperationBest,
            InteractionType::C | InteractionType::D => RewardCase::MixedPairBest,
        }
    }

    pub fn risk_case(self) -> RiskCase {
        match self {
            InteractionType::A | InteractionType::C => RiskCase::MutualCooperationSafest,
            InteractionType::B | InteractionType::D => RiskCase::MixedPairSafest,
        }
    }
}

impl fmt::Display for InteractionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InteractionType::A => "A",
            InteractionType::B => "B",
            InteractionType::C => "C",
            InteractionType::D => "D",
        };
        f.write_str(s)
    }
}

/// Built-in tables generated from the narrow-road driving scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    TypeA,
    TypeB,
    TypeC,
    TypeD,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::TypeA, Preset::TypeB, Preset::TypeC, Preset::TypeD];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TypeA => "type_a",
            Preset::TypeB => "type_b",
            Preset::TypeC => "type_c",
            Preset::TypeD => "type_d",
        }
    }

    pub fn raw(self) -> RawTable {
        let (r_cc, r_cd, r_dc, r_dd, w_cc, w_cd, w_dd) = match self {
            Preset::TypeA => (65.51, 17.93, 96.8, -69.23, 0.00078, 0.00109, 0.00147),
            Preset::TypeB => (53.53, -0.05, 68.7, -264.59, 0.00147, 0.00134, 0.00172),
            Preset::TypeC => (60.29, 40.79, 95.28, 40.31, 0.00058, 0.00073, 0.0015),
            Preset::TypeD => (56.13, 49.87, 88.24, 43.49, 0.00057, 0.00044, 0.00077),
        };
        RawTable { r_cc, r_cd, r_dc, r_dd, w_cc, w_cd, w_dd }
    }

    pub fn table(self) -> PayoffRiskTable {
        validate_table(self.raw()).expect("built-in presets satisfy the table assumptions")
    }

    /// The interaction type the preset was generated to represent.
    pub fn label(self) -> InteractionType {
        match self {
            Preset::TypeA => InteractionType::A,
            Preset::TypeB => InteractionType::B,
            Preset::TypeC => InteractionType::C,
            Preset::TypeD => InteractionType::D,
        }
    }

    /// Tolerable risk used for this type in the reference experiments.
    pub fn reference_epsilon(self) -> f64 {
        match self {
            Preset::TypeA => 9e-4,
            Preset::TypeB => 1.4e-3,
            Preset::TypeC => 7.29e-4,
            Preset::TypeD => 4.4e-4,
        }
    }
}

impl FromStr for Preset {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| GameError::UnknownPreset(s.to_string()))
    }
}

/// Joint mixed strategy `(pi_h, pi_a)`, both probabilities of cooperating.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyPair {
    pi_h: f64,
    pi_a: f64,
}

impl StrategyPair {
    pub fn new(pi_h: f64, pi_a: f64) -> Result<Self, GameError> {
        check_probability("pi_h", pi_h)?;
        check_probability("pi_a", pi_a)?;
        Ok(StrategyPair { pi_h, pi_a })
    }

    pub fn pi_h(&self) -> f64 {
        self.pi_h
    }

    pub fn pi_a(&self) -> f64 {
        self.pi_a
    }

    /// Same pair with the roles exchanged.
    pub fn swapped(&self) -> Self {
        StrategyPair { pi_h: self.pi_a, pi_a: self.pi_h }
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<(), GameError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(GameError::StrategyOutOfRange { name, value })
    }
}

impl PayoffRiskTable {
    pub fn raw(&self) -> RawTable {
        self.raw
    }

    pub fn r_cc(&self) -> f64 {
        self.raw.r_cc
    }

    pub fn r_cd(&self) -> f64 {
        self.raw.r_cd
    }

    pub fn r_dc(&self) -> f64 {
        self.raw.r_dc
    }

    pub fn r_dd(&self) -> f64 {
        self.raw.r_dd
    }

    pub fn w_cc(&self) -> f64 {
        self.raw.w_cc
    }

    pub fn w_cd(&self) -> f64 {
        self.raw.w_cd
    }

    pub fn w_dd(&self) -> f64 {
        self.raw.w_dd
    }

    /// `r_cc + r_dd - r_dc - r_cd`; strictly negative for a validated table.
    pub fn denominator(&self) -> f64 {
        self.raw.r_cc + self.raw.r_dd - self.raw.r_dc - self.raw.r_cd
    }

    /// The reward-only mixed Nash equilibrium `L`: the autonomous-agent
    /// cooperation level at which a human is indifferent between `C` and `D`.
    pub fn msne_threshold(&self) -> f64 {
        self.threshold
    }

    /// Largest minus smallest reward entry.
    pub fn reward_spread(&self) -> f64 {
        let r = [self.raw.r_cc, self.raw.r_cd, self.raw.r_dc, self.raw.r_dd];
        let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Expected human reward for playing `intent` against an autonomous agent
    /// that cooperates with probability `pi_a` (`theta_C` / `theta_D`).
    pub fn conditional_reward(&self, intent: Intent, pi_a: f64) -> f64 {
        match intent {
            Intent::Cooperate => pi_a * self.raw.r_cc + (1.0 - pi_a) * self.raw.r_cd,
            Intent::Defect => pi_a * self.raw.r_dc + (1.0 - pi_a) * self.raw.r_dd,
        }
    }

    /// Reward of an agent playing `own` against `other`.
    pub fn reward(&self, own: Intent, other: Intent) -> f64 {
        match (own, other) {
            (Intent::Cooperate, Intent::Cooperate) => self.raw.r_cc,
            (Intent::Cooperate, Intent::Defect) => self.raw.r_cd,
            (Intent::Defect, Intent::Cooperate) => self.raw.r_dc,
            (Intent::Defect, Intent::Defect) => self.raw.r_dd,
        }
    }

    /// Expected total (human + autonomous) reward `E[R | pi]`.
    pub fn expected_total_reward(&self, pi: StrategyPair) -> f64 {
        let (h, a) = (pi.pi_h, pi.pi_a);
        2.0 * self.raw.r_cc * h * a
            + (self.raw.r_cd + self.raw.r_dc) * (h * (1.0 - a) + (1.0 - h) * a)
            + 2.0 * self.raw.r_dd * (1.0 - h) * (1.0 - a)
    }

    /// Expected latent risk `E[W | pi]`.
    pub fn expected_risk(&self, pi: StrategyPair) -> f64 {
        let (h, a) = (pi.pi_h, pi.pi_a);
        self.raw.w_cc * h * a + self.raw.w_cd * (h * (1.0 - a) + (1.0 - h) * a) + self.raw.w_dd * (1.0 - h) * (1.0 - a)
    }

    /// Places the table in the A–D taxonomy. Ties and a non-maximal `w_dd`
    /// are rejected rather than broken.
    pub fn classify_interaction(&self) -> Result<InteractionType, GameError> {
        let r = &self.raw;
        let cross = r.r_cd + r.r_dc;
        let reward = if 2.0 * r.r_cc > cross && cross > 2.0 * r.r_dd {
            RewardCase::MutualCooperationBest
        } else if cross > 2.0 * r.r_cc && 2.0 * r.r_cc > 2.0 * r.r_dd {
            RewardCase::MixedPairBest
        } else {
            return Err(GameError::UnclassifiableTable(format!(
                "rewards satisfy neither 2r_cc > r_cd + r_dc > 2r_dd nor r_cd + r_dc > 2r_cc > 2r_dd \
                 (2r_cc = {}, r_cd + r_dc = {}, 2r_dd = {})",
                2.0 * r.r_cc,
                cross,
                2.0 * r.r_dd
            )));
        };
        let risk = if r.w_cc < r.w_cd && r.w_cd < r.w_dd {
            RiskCase::MutualCooperationSafest
        } else if r.w_cd < r.w_cc && r.w_cc < r.w_dd {
            RiskCase::MixedPairSafest
        } else {
            return Err(GameError::UnclassifiableTable(format!(
                "risks satisfy neither w_cc < w_cd < w_dd nor w_cd < w_cc < w_dd \
                 (w_cc = {}, w_cd = {}, w_dd = {})",
                r.w_cc, r.w_cd, r.w_dd
            )));
        };
        Ok(InteractionType::from_cases(reward, risk))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(r: [f64; 4], w: [f64; 3]) -> RawTable {
        RawTable { r_cc: r[0], r_cd: r[1], r_dc: r[2], r_dd: r[3], w_cc: w[0], w_cd: w[1], w_dd: w[2] }
    }

    #[test]
    fn type_a_values_validate() {
        let t = validate_table(Preset::TypeA.raw()).unwrap();
        assert_eq!(t.r_dd(), -69.23);
        assert_eq!(t.w_cd(), 0.00109);
    }

    #[test]
    fn rejects_ordering_violations() {
        let err = validate_table(raw([1.0, 0.0, 3.0, 1.0], [0.1, 0.2, 0.3])).unwrap_err();
        assert_eq!(err, GameError::AssumptionViolation(Assumption::DefectDefectBelowCooperateDefect));
        let err = validate_table(raw([5.0, 1.0, 3.0, 0.0], [0.1, 0.2, 0.3])).unwrap_err();
        assert_eq!(err, GameError::AssumptionViolation(Assumption::CooperateCooperateBelowDefectCooperate));
        let err = validate_table(raw([1.0, 1.0, 3.0, 0.0], [0.1, 1.2, 0.3])).unwrap_err();
        assert_eq!(err, GameError::AssumptionViolation(Assumption::RiskIsProbability("w_cd")));
    }

    #[test]
    fn zero_denominator_is_degenerate() {
        // r_cc + r_dd - r_dc - r_cd = 2 + 1 - 2 - 1 = 0
        let err = validate_table(raw([2.0, 1.0, 2.0, 1.0], [0.1, 0.2, 0.3])).unwrap_err();
        assert_eq!(err, GameError::DegenerateDenominator);
    }

    #[test]
    fn non_finite_entries_are_named() {
        let err = validate_table(raw([1.0, f64::NAN, 3.0, 0.0], [0.1, 0.2, 0.3])).unwrap_err();
        assert_eq!(err, GameError::NonFinite("r_cd"));
    }

    #[test]
    fn symmetric_table_has_half_threshold() {
        // r_cd = r_dc and r_cc - r_dc = r_dd - r_cd
        let t = validate_table(raw([1.0, 3.0, 3.0, 1.0], [0.1, 0.2, 0.3])).unwrap();
        assert_eq!(t.msne_threshold(), 0.5);
    }

    #[test]
    fn type_d_threshold_is_interior() {
        let l = Preset::TypeD.table().msne_threshold();
        assert!(l > 0.0 && l < 1.0);
    }

    #[test]
    fn conditional_rewards_reduce_to_entries() {
        let t = Preset::TypeA.table();
        assert_eq!(t.conditional_reward(Intent::Cooperate, 1.0), 65.51);
        assert_eq!(t.conditional_reward(Intent::Defect, 0.0), -69.23);
        assert!((t.conditional_reward(Intent::Cooperate, 0.5) - 41.72).abs() < 1e-12);
    }

    #[test]
    fn expected_reward_and_risk_at_corners() {
        let t = Preset::TypeA.table();
        let both_c = StrategyPair::new(1.0, 1.0).unwrap();
        let both_d = StrategyPair::new(0.0, 0.0).unwrap();
        assert!((t.expected_total_reward(both_c) - 131.02).abs() < 1e-12);
        assert!((t.expected_total_reward(both_d) + 138.46).abs() < 1e-12);
        assert_eq!(t.expected_risk(both_c), 0.00078);
        assert_eq!(t.expected_risk(StrategyPair::new(0.0, 1.0).unwrap()), 0.00109);
    }

    #[test]
    fn presets_classify_as_labelled() {
        for p in Preset::ALL {
            assert_eq!(p.table().classify_interaction().unwrap(), p.label(), "{}", p.name());
        }
    }

    #[test]
    fn boundary_equalities_are_unclassifiable() {
        // 2 r_cc = r_cd + r_dc
        let t = validate_table(raw([2.0, 1.0, 3.0, 0.0], [0.1, 0.2, 0.3])).unwrap();
        assert!(matches!(t.classify_interaction(), Err(GameError::UnclassifiableTable(_))));
        // w_cc = w_cd
        let t = validate_table(raw([3.0, 1.0, 4.0, 0.0], [0.2, 0.2, 0.3])).unwrap();
        assert!(matches!(t.classify_interaction(), Err(GameError::UnclassifiableTable(_))));
        // w_dd not the largest
        let t = validate_table(raw([3.0, 1.0, 4.0, 0.0], [0.1, 0.2, 0.15])).unwrap();
        assert!(matches!(t.classify_interaction(), Err(GameError::UnclassifiableTable(_))));
    }

    #[test]
    fn strategy_pair_rejects_out_of_range() {
        assert!(StrategyPair::new(1.5, 0.0).is_err());
        assert!(StrategyPair::new(0.5, -0.1).is_err());
        assert!(StrategyPair::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("type_e".parse::<Preset>().is_err());
    }

    #[test]
    fn table_deserializes_through_validation() {
        let ok: PayoffRiskTable = serde_json::from_str(
            r#"{"r_cc":65.51,"r_cd":17.93,"r_dc":96.8,"r_dd":-69.23,"w_cc":0.00078,"w_cd":0.00109,"w_dd":0.00147}"#,
        )
        .unwrap();
        assert_eq!(ok, Preset::TypeA.table());
        let bad = serde_json::from_str::<PayoffRiskTable>(
            r#"{"r_cc":1,"r_cd":0,"r_dc":3,"r_dd":1,"w_cc":0.1,"w_cd":0.2,"w_dd":0.3}"#,
        );
        assert!(bad.is_err());
    }
}
