//! Per-kick predictor vectors built from a taker's earlier kicks, plus
//! player-grouped cross-validation folds.
//!
//! Missing values are NaN throughout. One-hot groups are either exactly one
//! 1.0 or entirely NaN.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::domain::*;
use crate::error::{invalid, Error, Result};
use crate::shootout::ShootoutScore;

pub const N_FEATURES: usize = 47;

/// Canonical column order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    // contextual
    "minute",
    "is_shootout",
    "goal_diff",
    "shootout_kicks_taken",
    "own_team_kicks_taken",
    "miss_means_loss",
    "goal_means_win",
    // taker / keeper general
    "preferred_foot",
    "position_line",
    "age",
    "keeper_height_cm",
    // experience
    "pens_taken",
    "pens_scored",
    "pens_normal_pressure",
    "pens_high_pressure",
    // preference
    "pct_to_natural",
    "pct_to_nonnatural",
    "pct_to_center",
    "pct_scored_natural",
    "pct_scored_nonnatural",
    "pct_scored_center",
    "first_pen_goal",
    "first_pen_saved",
    "first_pen_missed",
    "first_pen_natural",
    "first_pen_center",
    "first_pen_nonnatural",
    "last_pen_goal",
    "last_pen_saved",
    "last_pen_missed",
    "last_pen_natural",
    "last_pen_center",
    "last_pen_nonnatural",
    // distance
    "avg_dist_from_center",
    "n_kicks_near_post",
    // shootout
    "opp_last_goal",
    "opp_last_saved",
    "opp_last_missed",
    "opp_last_natural",
    "opp_last_center",
    "opp_last_nonnatural",
    "own_last_goal",
    "own_last_saved",
    "own_last_missed",
    "own_last_natural",
    "own_last_center",
    "own_last_nonnatural",
];

/// (group name, number of columns), in column order.
pub const FEATURE_GROUPS: [(&str, usize); 6] = [
    ("contextual", 7),
    ("general", 4),
    ("experience", 4),
    ("preference", 18),
    ("distance", 2),
    ("shootout", 12),
];

const CONTEXT: usize = 0;
const GENERAL: usize = 7;
const EXPERIENCE: usize = 11;
const PREFERENCE: usize = 15;
const FIRST_PEN: usize = PREFERENCE + 6;
const LAST_PEN: usize = PREFERENCE + 12;
const DISTANCE: usize = 33;
const SHOOTOUT: usize = 35;

/// Distance from a post that counts as "near the post".
pub const NEAR_POST_MARGIN: f64 = 0.5;

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

pub fn feature_group(index: usize) -> &'static str {
    let mut start = 0;
    for (name, len) in FEATURE_GROUPS {
        if index < start + len {
            return name;
        }
        start += len;
    }
    "unknown"
}

/// SHA-256 over the ordered feature names; stored in model files so a model
/// is never applied to vectors with a different layout.
pub fn schema_hash() -> String {
    let mut h = Sha256::new();
    for name in FEATURE_NAMES {
        h.update(name.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaEntry {
    pub name: &'static str,
    pub group: &'static str,
    #[serde(rename = "type")]
    pub kind: &'static str,
}

pub fn schema() -> Vec<SchemaEntry> {
    FEATURE_NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let kind = if FIRST_PEN <= i && i < DISTANCE || i >= SHOOTOUT || matches!(*name, "is_shootout" | "miss_means_loss" | "goal_means_win") {
                "boolean"
            } else if matches!(*name, "preferred_foot" | "position_line") {
                "categorical"
            } else {
                "numeric"
            };
            SchemaEntry { name, group: feature_group(i), kind }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FeatureVector {
    pub values: [f64; N_FEATURES],
}

impl Default for FeatureVector {
    fn default() -> Self {
        FeatureVector { values: [f64::NAN; N_FEATURES] }
    }
}

impl PartialEq for FeatureVector {
    /// NaN equals NaN here: vectors compare as data, not as floats.
    fn eq(&self, other: &Self) -> bool {
        self.values
            .iter()
            .zip(other.values.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()))
    }
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let i = feature_index(name).ok_or_else(|| invalid(format!("unknown feature {name}")))?;
        self.values[i] = value;
        Ok(())
    }

    fn one_hot(&mut self, start: usize, hot: Option<usize>) {
        if let Some(h) = hot {
            for k in 0..3 {
                self.values[start + k] = if k == h { 1.0 } else { 0.0 };
            }
        }
    }
}

/// Serialized as a name → number map with `null` for missing values.
impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(N_FEATURES))?;
        for (name, v) in FEATURE_NAMES.iter().zip(self.values.iter()) {
            map.serialize_entry(name, &if v.is_nan() { None } else { Some(*v) })?;
        }
        map.end()
    }
}

/// Absent names are missing values; unknown names are rejected.
impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: BTreeMap<String, Option<f64>> = BTreeMap::deserialize(d)?;
        let mut fv = FeatureVector::default();
        for (name, v) in raw {
            let i = feature_index(&name).ok_or_else(|| D::Error::custom(format!("unknown feature `{name}`")))?;
            fv.values[i] = v.unwrap_or(f64::NAN);
        }
        Ok(fv)
    }
}

/// Coarse playing position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionLine {
    Goalkeeper,
    Defender,
    Midfielder,
    Forward,
}

impl PositionLine {
    pub fn code(self) -> f64 {
        match self {
            PositionLine::Goalkeeper => 0.0,
            PositionLine::Defender => 1.0,
            PositionLine::Midfielder => 2.0,
            PositionLine::Forward => 3.0,
        }
    }
}

pub fn foot_code(foot: Foot) -> f64 {
    match foot {
        Foot::Right => 0.0,
        Foot::Left => 1.0,
    }
}

/// Optional biographical data for takers and keepers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerBio {
    pub player_id: String,
    pub position: Option<PositionLine>,
    pub birth_date: Option<NaiveDate>,
    pub height_cm: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct BioTable {
    players: HashMap<String, PlayerBio>,
}

impl BioTable {
    pub fn new(rows: Vec<PlayerBio>) -> Self {
        BioTable { players: rows.into_iter().map(|p| (p.player_id.clone(), p)).collect() }
    }

    pub fn get(&self, id: &str) -> Option<&PlayerBio> {
        self.players.get(id)
    }
}

fn age_years(birth: NaiveDate, on: NaiveDate) -> f64 {
    let mut years = on.year() - birth.year();
    if (on.month(), on.day()) < (birth.month(), birth.day()) {
        years -= 1;
    }
    years as f64
}

/// Last kick of each side in a running shootout, relative to the kicker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorKick {
    pub outcome: Outcome,
    /// Direction relative to that kick's own taker.
    pub direction: Option<Zone>,
}

/// Shootout situation immediately before a kick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ShootoutState {
    pub score: ShootoutScore,
    pub opponent_last: Option<PriorKick>,
    pub own_last: Option<PriorKick>,
}

impl ShootoutState {
    pub fn kicks_taken(&self) -> u32 {
        self.score.own_kicks + self.score.opp_kicks
    }
}

/// Shootout state for `kick` given all shootout kicks of the same match.
///
/// Teams are told apart by the parity of the overall kick index. Kicks
/// absent from `match_kicks` still count toward the kick totals, since
/// those follow from the indices.
pub fn shootout_state(kick: &PenaltyRecord, match_kicks: &[&PenaltyRecord]) -> Option<ShootoutState> {
    let k = kick.shootout_kick_index?;
    let own_kicks = kick.shootout_team_kick_index.map(|t| t - 1).unwrap_or((k - 1) / 2);
    let mut state = ShootoutState {
        score: ShootoutScore { own_goals: 0, own_kicks, opp_goals: 0, opp_kicks: (k - 1).saturating_sub(own_kicks) },
        ..Default::default()
    };
    let mut own_last_idx = 0;
    let mut opp_last_idx = 0;
    for other in match_kicks {
        let Some(j) = other.shootout_kick_index else { continue };
        if !other.is_shootout || other.match_id != kick.match_id || j >= k {
            continue;
        }
        let prior = PriorKick { outcome: other.outcome, direction: other.direction() };
        let scored = other.outcome == Outcome::Goal;
        if j % 2 == k % 2 {
            state.score.own_goals += scored as u32;
            if j > own_last_idx {
                own_last_idx = j;
                state.own_last = Some(prior);
            }
        } else {
            state.score.opp_goals += scored as u32;
            if j > opp_last_idx {
                opp_last_idx = j;
                state.opponent_last = Some(prior);
            }
        }
    }
    Some(state)
}

/// Ordering key of a kick in a player's history.
pub fn chronological_key(r: &PenaltyRecord) -> (Option<NaiveDate>, bool, u32, u32) {
    (r.date, r.is_shootout, r.minute, r.shootout_kick_index.unwrap_or(0))
}

/// Features of `kick` from its taker's earlier kicks.
///
/// `history` must be chronological and contain no kick later than `kick`.
pub fn extract(
    kick: &PenaltyRecord,
    history: &[&PenaltyRecord],
    shootout: Option<&ShootoutState>,
    bio: Option<&BioTable>,
) -> Result<FeatureVector> {
    let key = chronological_key(kick);
    for (pos, pair) in history.windows(2).enumerate() {
        if chronological_key(pair[0]) > chronological_key(pair[1]) {
            return Err(Error::UnorderedHistory { position: pos + 1 });
        }
    }
    if let Some(last) = history.last() {
        if chronological_key(last) > key {
            return Err(Error::UnorderedHistory { position: history.len() - 1 });
        }
    }

    let mut fv = FeatureVector::default();
    let v = &mut fv.values;
    v[CONTEXT] = kick.minute as f64;
    v[CONTEXT + 1] = kick.is_shootout as u8 as f64;
    v[CONTEXT + 2] = kick.goal_diff as f64;
    if let (true, Some(s)) = (kick.is_shootout, shootout) {
        v[CONTEXT + 3] = s.kicks_taken() as f64;
        v[CONTEXT + 4] = s.score.own_kicks as f64;
        v[CONTEXT + 5] = s.score.miss_means_loss() as u8 as f64;
        v[CONTEXT + 6] = s.score.goal_means_win() as u8 as f64;
    }

    v[GENERAL] = foot_code(kick.foot);
    if let Some(bio) = bio {
        if let Some(p) = bio.get(&kick.taker_id) {
            v[GENERAL + 1] = p.position.map_or(f64::NAN, PositionLine::code);
            if let (Some(b), Some(d)) = (p.birth_date, kick.date) {
                v[GENERAL + 2] = age_years(b, d);
            }
        }
        if let Some(k) = bio.get(&kick.keeper_id) {
            v[GENERAL + 3] = k.height_cm.unwrap_or(f64::NAN);
        }
    }

    fill_history(&mut fv, history);

    if let (true, Some(s)) = (kick.is_shootout, shootout) {
        set_prior(&mut fv, SHOOTOUT, s.opponent_last);
        set_prior(&mut fv, SHOOTOUT + 6, s.own_last);
    }
    Ok(fv)
}

fn set_prior(fv: &mut FeatureVector, start: usize, prior: Option<PriorKick>) {
    if let Some(p) = prior {
        fv.one_hot(start, Some(p.outcome.index()));
        fv.one_hot(start + 3, p.direction.map(Zone::index));
    }
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn fill_history(fv: &mut FeatureVector, history: &[&PenaltyRecord]) {
    if history.is_empty() {
        return;
    }
    let v = &mut fv.values;
    let scored = history.iter().filter(|r| r.outcome == Outcome::Goal).count();
    v[EXPERIENCE] = history.len() as f64;
    v[EXPERIENCE + 1] = scored as f64;
    v[EXPERIENCE + 2] = history.iter().filter(|r| r.pressure == Pressure::Normal).count() as f64;
    v[EXPERIENCE + 3] = history.iter().filter(|r| r.pressure == Pressure::High).count() as f64;

    let mut to = [0usize; 3];
    let mut scored_to = [0usize; 3];
    for r in history {
        if let Some(z) = r.direction() {
            to[z.index()] += 1;
            scored_to[z.index()] += (r.outcome == Outcome::Goal) as usize;
        }
    }
    let with_direction: usize = to.iter().sum();
    for (slot, zone) in [Zone::Natural, Zone::NonNatural, Zone::Center].into_iter().enumerate() {
        v[PREFERENCE + slot] = pct(to[zone.index()], with_direction);
        v[PREFERENCE + 3 + slot] = pct(scored_to[zone.index()], to[zone.index()]);
    }

    let first = history[0];
    let last = history[history.len() - 1];
    fv.one_hot(FIRST_PEN, Some(first.outcome.index()));
    fv.one_hot(FIRST_PEN + 3, first.direction().map(Zone::index));
    fv.one_hot(LAST_PEN, Some(last.outcome.index()));
    fv.one_hot(LAST_PEN + 3, last.direction().map(Zone::index));

    let coords: Vec<(f64, f64)> = history.iter().filter_map(|r| r.coordinates()).collect();
    let v = &mut fv.values;
    if !coords.is_empty() {
        v[DISTANCE] = coords.iter().map(|(x, z)| x.hypot(*z)).sum::<f64>() / coords.len() as f64;
    }
    v[DISTANCE + 1] = coords
        .iter()
        .filter(|(x, _)| (x.abs() - GOAL_HALF_WIDTH).abs() <= NEAR_POST_MARGIN)
        .count() as f64;
}

/// Features for every record, in input order.
///
/// Histories are built in one pass per taker; ties in the chronological key
/// keep input order.
pub fn extract_all(records: &[PenaltyRecord], bio: Option<&BioTable>) -> Result<Vec<FeatureVector>> {
    let mut by_taker: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_taker.entry(r.taker_id.as_str()).or_default().push(i);
    }
    let mut shootouts: HashMap<&str, Vec<&PenaltyRecord>> = HashMap::new();
    for r in records.iter().filter(|r| r.is_shootout) {
        shootouts.entry(r.match_id.as_str()).or_default().push(r);
    }

    // (record index, position in taker order, taker's sorted kicks)
    let mut jobs: Vec<(usize, usize, &[usize])> = Vec::with_capacity(records.len());
    let mut orders: Vec<Vec<usize>> = by_taker.into_values().collect();
    for order in orders.iter_mut() {
        order.sort_by(|a, b| chronological_key(&records[*a]).cmp(&chronological_key(&records[*b])).then(a.cmp(b)));
    }
    for order in &orders {
        for (pos, idx) in order.iter().enumerate() {
            jobs.push((*idx, pos, order.as_slice()));
        }
    }

    let mut out: Vec<(usize, FeatureVector)> = jobs
        .par_iter()
        .map(|(idx, pos, order)| {
            let kick = &records[*idx];
            let history: Vec<&PenaltyRecord> = order[..*pos].iter().map(|i| &records[*i]).collect();
            let state = if kick.is_shootout {
                shootout_state(kick, shootouts.get(kick.match_id.as_str()).map_or(&[][..], |v| v.as_slice()))
            } else {
                None
            };
            extract(kick, &history, state.as_ref(), bio).map(|fv| (*idx, fv))
        })
        .collect::<Result<_>>()?;
    out.sort_by_key(|(i, _)| *i);
    Ok(out.into_iter().map(|(_, fv)| fv).collect())
}

/// Hypothetical kick described by raw context and taker summary statistics,
/// as entered in an advisory form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KickContext {
    pub minute: u32,
    pub is_shootout: bool,
    pub goal_diff: i32,
    pub shootout_kick_index: Option<u32>,
    pub own_goals: Option<u32>,
    pub opp_goals: Option<u32>,
    pub foot: Option<Foot>,
    pub position: Option<PositionLine>,
    pub age: Option<f64>,
    pub keeper_height_cm: Option<f64>,
    pub pens_taken: Option<u32>,
    pub pens_scored: Option<u32>,
    pub pens_normal_pressure: Option<u32>,
    pub pens_high_pressure: Option<u32>,
    pub pct_to_natural: Option<f64>,
    pub pct_to_nonnatural: Option<f64>,
    pub pct_to_center: Option<f64>,
    pub pct_scored_natural: Option<f64>,
    pub pct_scored_nonnatural: Option<f64>,
    pub pct_scored_center: Option<f64>,
    pub avg_dist_from_center: Option<f64>,
    pub n_kicks_near_post: Option<u32>,
}

impl KickContext {
    pub fn validate(&self) -> Result<()> {
        if self.is_shootout && self.shootout_kick_index.is_none() {
            return Err(invalid("shootout_kick_index: required when is_shootout is true"));
        }
        if !self.is_shootout && (self.shootout_kick_index.is_some() || self.own_goals.is_some() || self.opp_goals.is_some()) {
            return Err(invalid("shootout_kick_index: only allowed when is_shootout is true"));
        }
        if self.shootout_kick_index == Some(0) {
            return Err(invalid("shootout_kick_index: must be >= 1"));
        }
        if let (Some(t), Some(s)) = (self.pens_taken, self.pens_scored) {
            if s > t {
                return Err(invalid("pens_scored: cannot exceed pens_taken"));
            }
        }
        for (name, p) in [
            ("pct_to_natural", self.pct_to_natural),
            ("pct_to_nonnatural", self.pct_to_nonnatural),
            ("pct_to_center", self.pct_to_center),
            ("pct_scored_natural", self.pct_scored_natural),
            ("pct_scored_nonnatural", self.pct_scored_nonnatural),
            ("pct_scored_center", self.pct_scored_center),
        ] {
            if let Some(p) = p {
                if !(0.0..=100.0).contains(&p) {
                    return Err(invalid(format!("{name}: must be within [0, 100]")));
                }
            }
        }
        if let Some(d) = self.avg_dist_from_center {
            if !(0.0..=MAX_ON_TARGET_DISTANCE + 1.0).contains(&d) {
                return Err(invalid("avg_dist_from_center: out of range"));
            }
        }
        Ok(())
    }

    pub fn foot(&self) -> Foot {
        self.foot.unwrap_or(Foot::Right)
    }

    pub fn to_features(&self) -> Result<FeatureVector> {
        self.validate()?;
        let mut fv = FeatureVector::default();
        let v = &mut fv.values;
        v[CONTEXT] = self.minute as f64;
        v[CONTEXT + 1] = self.is_shootout as u8 as f64;
        v[CONTEXT + 2] = self.goal_diff as f64;
        if let Some(k) = self.shootout_kick_index {
            let own_kicks = (k - 1) / 2;
            let score = ShootoutScore {
                own_goals: self.own_goals.unwrap_or(0),
                own_kicks,
                opp_goals: self.opp_goals.unwrap_or(0),
                opp_kicks: k - 1 - own_kicks,
            };
            v[CONTEXT + 3] = (k - 1) as f64;
            v[CONTEXT + 4] = own_kicks as f64;
            if self.own_goals.is_some() && self.opp_goals.is_some() {
                v[CONTEXT + 5] = score.miss_means_loss() as u8 as f64;
                v[CONTEXT + 6] = score.goal_means_win() as u8 as f64;
            }
        }
        let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
        let optu = |x: Option<u32>| x.map_or(f64::NAN, |x| x as f64);
        v[GENERAL] = self.foot.map_or(f64::NAN, foot_code);
        v[GENERAL + 1] = self.position.map_or(f64::NAN, PositionLine::code);
        v[GENERAL + 2] = opt(self.age);
        v[GENERAL + 3] = opt(self.keeper_height_cm);
        v[EXPERIENCE] = optu(self.pens_taken);
        v[EXPERIENCE + 1] = optu(self.pens_scored);
        v[EXPERIENCE + 2] = optu(self.pens_normal_pressure);
        v[EXPERIENCE + 3] = optu(self.pens_high_pressure);
        v[PREFERENCE] = opt(self.pct_to_natural);
        v[PREFERENCE + 1] = opt(self.pct_to_nonnatural);
        v[PREFERENCE + 2] = opt(self.pct_to_center);
        v[PREFERENCE + 3] = opt(self.pct_scored_natural);
        v[PREFERENCE + 4] = opt(self.pct_scored_nonnatural);
        v[PREFERENCE + 5] = opt(self.pct_scored_center);
        v[DISTANCE] = opt(self.avg_dist_from_center);
        v[DISTANCE + 1] = optu(self.n_kicks_near_post);
        Ok(fv)
    }
}

/// Fold index per record such that each taker's kicks share one fold.
///
/// Takers are shuffled with `seed`, then stably sorted by kick count
/// (largest first) and placed one by one into the currently smallest fold.
pub fn grouped_folds(records: &[PenaltyRecord], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(invalid("k must be >= 2"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *counts.entry(r.taker_id.as_str()).or_default() += 1;
    }
    if counts.len() < k {
        return Err(invalid(format!("{} distinct takers for {k} folds", counts.len())));
    }
    let mut takers: Vec<(&str, usize)> = counts.into_iter().collect();
    takers.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    takers.sort_by(|a, b| b.1.cmp(&a.1));
    let mut sizes = vec![0usize; k];
    let mut fold_of: HashMap<&str, usize> = HashMap::new();
    for (taker, n) in takers {
        let fold = (0..k).min_by_key(|f| (sizes[*f], *f)).unwrap();
        sizes[fold] += n;
        fold_of.insert(taker, fold);
    }
    Ok(records.iter().map(|r| fold_of[r.taker_id.as_str()]).collect())
}

/// CSV with `kick_id` followed by the 47 feature columns; NaN is written as
/// an empty field.
pub fn write_feature_csv<W: Write>(writer: W, records: &[PenaltyRecord], features: &[FeatureVector]) -> Result<()> {
    if records.len() != features.len() {
        return Err(invalid("records and feature vectors differ in length"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["kick_id"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for (r, fv) in records.iter().zip(features) {
        let mut row = vec![r.kick_id.clone()];
        row.extend(fv.values.iter().map(|v| if v.is_nan() { String::new() } else { format!("{v}") }));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_feature_csv`], returning kick ids and vectors.
pub fn read_feature_csv<R: std::io::Read>(reader: R) -> Result<(Vec<String>, Vec<FeatureVector>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("kick_id").chain(FEATURE_NAMES).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::SchemaMismatch { expected: schema_hash(), found: "different feature columns".into() });
    }
    let mut ids = Vec::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        ids.push(row[0].to_string());
        let mut fv = FeatureVector::default();
        for (i, cell) in row.iter().skip(1).enumerate() {
            if !cell.is_empty() {
                fv.values[i] = cell.parse().map_err(|_| invalid(format!("feature {}: bad number `{cell}`", FEATURE_NAMES[i])))?;
            }
        }
        out.push(fv);
    }
    Ok((ids, out))
}
