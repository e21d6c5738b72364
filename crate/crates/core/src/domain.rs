//! Domain types shared by every stage of the pipeline, plus goal-mouth
//! geometry and pressure labeling.
//!
//! Coordinates: origin at the goal center on the goal line, `x` positive
//! toward the kicker's right, `z` up. Offsets "toward the natural corner"
//! are converted to signed `x` with [`natural_corner_sign`].

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Half the goal width (7.32 m / 2).
pub const GOAL_HALF_WIDTH: f64 = 3.66;
/// Crossbar height.
pub const GOAL_HEIGHT: f64 = 2.44;
/// Boundary between the center third and the corner thirds.
pub const ZONE_BOUNDARY: f64 = 1.22;
/// Upper bound on any on-target distance from the goal center (the mouth diagonal).
pub const MAX_ON_TARGET_DISTANCE: f64 = 4.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Foot {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TakerStrategy {
    Independent,
    Dependent,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Goal,
    Saved,
    OffTarget,
}

impl Outcome {
    /// Index into (goal, saved, missed) one-hot groups.
    pub fn index(self) -> usize {
        match self {
            Outcome::Goal => 0,
            Outcome::Saved => 1,
            Outcome::OffTarget => 2,
        }
    }
}

/// Horizontal zone of the goal relative to the kicker's dominant foot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Natural,
    Center,
    #[serde(rename = "nonnatural")]
    NonNatural,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Natural, Zone::Center, Zone::NonNatural];

    /// Index in (natural, center, nonnatural) order, the class order of the
    /// direction model.
    pub fn index(self) -> usize {
        match self {
            Zone::Natural => 0,
            Zone::Center => 1,
            Zone::NonNatural => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Zone> {
        Zone::ALL.get(i).copied()
    }

    pub fn is_corner(self) -> bool {
        self != Zone::Center
    }

    /// The other corner; center maps to itself.
    pub fn opposite(self) -> Zone {
        match self {
            Zone::Natural => Zone::NonNatural,
            Zone::NonNatural => Zone::Natural,
            Zone::Center => Zone::Center,
        }
    }

    /// Direction of a kick by thirds, without requiring it to be on target.
    /// Used for wide kicks whose direction still matters (features, payoffs).
    pub fn from_direction(end_x: f64, foot: Foot) -> Zone {
        if end_x.abs() < ZONE_BOUNDARY {
            Zone::Center
        } else if end_x.signum() == natural_corner_sign(foot) {
            Zone::Natural
        } else {
            Zone::NonNatural
        }
    }
}

/// Keeper dive zone as annotated; `Unknown` when not recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiveZone {
    Natural,
    Center,
    #[serde(rename = "nonnatural")]
    NonNatural,
    Unknown,
}

impl DiveZone {
    pub fn zone(self) -> Option<Zone> {
        match self {
            DiveZone::Natural => Some(Zone::Natural),
            DiveZone::Center => Some(Zone::Center),
            DiveZone::NonNatural => Some(Zone::NonNatural),
            DiveZone::Unknown => None,
        }
    }
}

impl From<Zone> for DiveZone {
    fn from(z: Zone) -> Self {
        match z {
            Zone::Natural => DiveZone::Natural,
            Zone::Center => DiveZone::Center,
            Zone::NonNatural => DiveZone::NonNatural,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiveTiming {
    Early,
    Late,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pressure {
    High,
    Normal,
    Low,
}

/// One penalty kick.
///
/// `date` is the match date; it is not part of the annotation itself but
/// orders a taker's history chronologically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRecord {
    pub kick_id: String,
    pub match_id: String,
    pub taker_id: String,
    pub keeper_id: String,
    pub minute: u32,
    pub is_shootout: bool,
    pub shootout_kick_index: Option<u32>,
    pub shootout_team_kick_index: Option<u32>,
    pub goal_diff: i32,
    pub foot: Foot,
    pub taker_strategy: TakerStrategy,
    pub end_x: Option<f64>,
    pub end_z: Option<f64>,
    pub outcome: Outcome,
    pub keeper_dive_zone: DiveZone,
    pub keeper_timing: DiveTiming,
    pub pressure: Pressure,
    #[serde(default)]
    pub date: Option<NaiveDate>,
}

impl PenaltyRecord {
    pub fn coordinates(&self) -> Option<(f64, f64)> {
        Some((self.end_x?, self.end_z?))
    }

    /// True when the flag says the kick was on target and, if coordinates are
    /// present, they lie inside the goal mouth.
    pub fn on_target(&self) -> bool {
        if self.outcome == Outcome::OffTarget {
            return false;
        }
        match self.coordinates() {
            Some((x, z)) => in_goal_mouth(x, z),
            None => true,
        }
    }

    /// Zone of an on-target kick; `None` without coordinates or off target.
    pub fn zone(&self) -> Option<Zone> {
        let (x, z) = self.coordinates()?;
        if self.outcome == Outcome::OffTarget || !in_goal_mouth(x, z) {
            return None;
        }
        classify_zone(x, self.foot).ok()
    }

    /// Direction by thirds, defined for wide kicks too.
    pub fn direction(&self) -> Option<Zone> {
        self.end_x.map(|x| Zone::from_direction(x, self.foot))
    }

    /// Distance from the goal center on the ground.
    pub fn distance_from_center(&self) -> Option<f64> {
        let (x, z) = self.coordinates()?;
        Some(distance_to_keeper(0.0, x, z))
    }

    /// Structural checks. Flag/coordinate disagreement is not an error here;
    /// see [`reconcile_outcome`].
    pub fn validate(&self) -> Result<()> {
        if self.kick_id.trim().is_empty() {
            return Err(invalid("kick_id is empty"));
        }
        if !self.is_shootout
            && (self.shootout_kick_index.is_some() || self.shootout_team_kick_index.is_some())
        {
            return Err(invalid(format!(
                "kick {}: shootout indices set on a non-shootout kick",
                self.kick_id
            )));
        }
        if self.shootout_kick_index == Some(0) || self.shootout_team_kick_index == Some(0) {
            return Err(invalid(format!("kick {}: shootout indices start at 1", self.kick_id)));
        }
        if let Some(z) = self.end_z {
            if !z.is_finite() || z < 0.0 {
                return Err(invalid(format!("kick {}: end_z must be >= 0", self.kick_id)));
            }
        }
        if let Some(x) = self.end_x {
            if !x.is_finite() {
                return Err(invalid(format!("kick {}: end_x is not finite", self.kick_id)));
            }
        }
        Ok(())
    }
}

pub fn in_goal_mouth(end_x: f64, end_z: f64) -> bool {
    end_x.abs() <= GOAL_HALF_WIDTH && (0.0..=GOAL_HEIGHT).contains(&end_z)
}

/// Decide the outcome from an explicit flag and/or coordinates.
///
/// The flag wins when both are present; a disagreement is returned as a
/// warning string. Without a flag, only "off target" can be inferred.
pub fn reconcile_outcome(
    flag: Option<Outcome>,
    coords: Option<(f64, f64)>,
) -> Result<(Outcome, Option<String>)> {
    match (flag, coords) {
        (Some(flag), Some((x, z))) => {
            let inside = in_goal_mouth(x, z);
            let warning = match (flag, inside) {
                (Outcome::OffTarget, true) => Some(format!(
                    "flagged off target but ({x:.2}, {z:.2}) lies inside the goal mouth"
                )),
                (Outcome::Goal | Outcome::Saved, false) => Some(format!(
                    "flagged on target but ({x:.2}, {z:.2}) lies outside the goal mouth"
                )),
                _ => None,
            };
            Ok((flag, warning))
        }
        (Some(flag), None) => Ok((flag, None)),
        (None, Some((x, z))) if !in_goal_mouth(x, z) => Ok((Outcome::OffTarget, None)),
        (None, Some(_)) => Err(invalid(
            "outcome missing and coordinates are on target; cannot tell goal from save",
        )),
        (None, None) => Err(invalid("outcome and coordinates both missing")),
    }
}

/// Sign of `x` at the kicker's natural corner: right-footed kickers go to
/// their left (negative `x`).
pub fn natural_corner_sign(foot: Foot) -> f64 {
    match foot {
        Foot::Right => -1.0,
        Foot::Left => 1.0,
    }
}

/// Zone of an on-target kick, splitting the goal into equal thirds.
pub fn classify_zone(end_x: f64, foot: Foot) -> Result<Zone> {
    if !end_x.is_finite() || end_x.abs() > GOAL_HALF_WIDTH {
        return Err(Error::OffTarget { end_x, end_z: 0.0 });
    }
    Ok(Zone::from_direction(end_x, foot))
}

/// Euclidean distance from a keeper standing on the goal line at signed
/// `start_x` to the ball's crossing point.
pub fn distance_to_keeper(start_x: f64, end_x: f64, end_z: f64) -> f64 {
    (end_x - start_x).hypot(end_z)
}

/// Pressure level: shootouts are high; otherwise tied or trailing by one is
/// high after the 80th minute and normal up to it; everything else is low.
pub fn pressure_label(is_shootout: bool, minute: u32, goal_diff: i32) -> Pressure {
    let close = goal_diff == 0 || goal_diff == -1;
    if is_shootout || (close && minute > 80) {
        Pressure::High
    } else if close {
        Pressure::Normal
    } else {
        Pressure::Low
    }
}

/// A keeper's action capacities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalkeeperProfile {
    pub early_range: f64,
    pub late_range: Option<f64>,
    pub p_late_correct_independent: f64,
    pub p_late_correct_dependent: f64,
    pub p_early_correct_dependent: f64,
    #[serde(default)]
    pub start_offset: f64,
}

impl GoalkeeperProfile {
    pub fn can_dive_late(&self) -> bool {
        self.late_range.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.early_range > 0.0) {
            return Err(invalid("early_range must be > 0"));
        }
        if let Some(late) = self.late_range {
            if !(late > 0.0 && late <= self.early_range) {
                return Err(invalid("late_range must lie in (0, early_range]"));
            }
        }
        for (name, p) in [
            ("p_late_correct_independent", self.p_late_correct_independent),
            ("p_late_correct_dependent", self.p_late_correct_dependent),
            ("p_early_correct_dependent", self.p_early_correct_dependent),
        ] {
            check_probability(name, p)?;
        }
        if !self.start_offset.is_finite() || self.start_offset.abs() > GOAL_HALF_WIDTH {
            return Err(invalid("start_offset must lie within the goal mouth"));
        }
        Ok(())
    }
}

/// Tolerance band and within-reach save probability of the reach model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyParams {
    pub mu: f64,
    pub rho: f64,
}

impl Default for UncertaintyParams {
    fn default() -> Self {
        UncertaintyParams { mu: 0.7, rho: 0.7 }
    }
}

impl UncertaintyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(invalid("mu must be >= 0"));
        }
        check_probability("rho", self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Late,
    Early,
    EarlyEducated,
    MixedEducated,
    GameTheoretic,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Late,
        PolicyKind::Early,
        PolicyKind::EarlyEducated,
        PolicyKind::MixedEducated,
        PolicyKind::GameTheoretic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Late => "late",
            PolicyKind::Early => "early",
            PolicyKind::EarlyEducated => "early_educated",
            PolicyKind::MixedEducated => "mixed_educated",
            PolicyKind::GameTheoretic => "game_theoretic",
        }
    }

    pub fn parse(s: &str) -> Result<PolicyKind> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == key || (key == "mixed" && *k == PolicyKind::MixedEducated))
            .ok_or_else(|| invalid(format!("unknown policy `{s}`")))
    }

    /// Whether the policy ever dives late (and so needs a late range).
    pub fn uses_late_dive(self) -> bool {
        matches!(
            self,
            PolicyKind::Late | PolicyKind::MixedEducated | PolicyKind::GameTheoretic
        )
    }

    pub fn needs_direction_model(self) -> bool {
        matches!(self, PolicyKind::EarlyEducated | PolicyKind::MixedEducated)
    }

    pub fn needs_distance_model(self) -> bool {
        self == PolicyKind::MixedEducated
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A goalkeeper policy and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Meters toward the kicker's natural corner, added to the keeper's own
    /// start offset.
    #[serde(default)]
    pub offset: f64,
    /// (natural, nonnatural) for the non-educated early policy; falls back to
    /// the empirical tables when absent.
    #[serde(default)]
    pub early_direction_mix: Option<[f64; 2]>,
    /// (dive natural early, dive late, dive nonnatural early).
    #[serde(default)]
    pub gt_mix: Option<[f64; 3]>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            offset: 0.0,
            early_direction_mix: None,
            gt_mix: None,
        }
    }

    pub fn with_gt_mix(mut self, mix: [f64; 3]) -> Self {
        self.gt_mix = Some(mix);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.offset.is_finite() || self.offset.abs() > GOAL_HALF_WIDTH {
            return Err(invalid("policy offset must lie in [-3.66, 3.66]"));
        }
        if let Some(mix) = &self.early_direction_mix {
            check_mix("early_direction_mix", mix)?;
        }
        if let Some(mix) = &self.gt_mix {
            check_mix("gt_mix", mix)?;
        }
        if self.kind == PolicyKind::GameTheoretic && self.gt_mix.is_none() {
            return Err(invalid("game_theoretic policy requires gt_mix"));
        }
        Ok(())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a probability in [0, 1], got {p}")))
    }
}

pub(crate) fn check_mix(name: &str, mix: &[f64]) -> Result<()> {
    if mix.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid(format!("{name} has a negative or non-finite entry")));
    }
    let total: f64 = mix.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("{name} sums to {total}, expected 1")));
    }
    Ok(())
}
