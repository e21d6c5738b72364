//! Merging two penalty datasets that name teams and players differently and
//! disagree slightly on dates and kick times.
//!
//! Stages: teams are mapped by fuzzy name similarity, games by mapped team
//! pair and tolerant date, players per game by name similarity again, and
//! finally kicks by taker and time, with result, direction and foot as
//! successive tie-breakers. Anything ambiguous is left unresolved and can be
//! settled with an override file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::*;
use crate::error::{invalid, Error, Result};
use crate::io::read_csv;

/// Auto-acceptance threshold; both comparisons against it are strict.
pub const AUTO_ACCEPT: f64 = 0.8;
pub const DEFAULT_TIME_TOLERANCE: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Team,
    Player,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NamedEntity {
    pub source: Source,
    pub raw_name: String,
    pub entity_kind: EntityKind,
}

impl NamedEntity {
    pub fn new(source: Source, raw_name: &str, entity_kind: EntityKind) -> Result<Self> {
        if raw_name.trim().is_empty() {
            return Err(invalid("entity name is empty"));
        }
        Ok(NamedEntity { source, raw_name: raw_name.to_string(), entity_kind })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCandidate {
    pub left: NamedEntity,
    pub right: NamedEntity,
    pub score: f64,
    pub auto_accepted: bool,
}

/// Lowercase, trim and collapse internal whitespace.
pub fn normalize_name(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Longest common block with the smallest start in `a`, then in `b`.
fn longest_match(a: &[char], b: &[char], alo: usize, ahi: usize, blo: usize, bhi: usize) -> (usize, usize, usize) {
    let (mut bi, mut bj, mut bk) = (alo, blo, 0);
    let mut prev = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        let mut cur = vec![0usize; bhi - blo + 1];
        for j in blo..bhi {
            if a[i] == b[j] {
                let k = prev[j - blo] + 1;
                cur[j - blo + 1] = k;
                if k > bk {
                    bi = i + 1 - k;
                    bj = j + 1 - k;
                    bk = k;
                }
            }
        }
        prev = cur;
    }
    (bi, bj, bk)
}

fn matched_chars(a: &[char], b: &[char]) -> usize {
    let mut stack = vec![(0, a.len(), 0, b.len())];
    let mut total = 0;
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let (i, j, k) = longest_match(a, b, alo, ahi, blo, bhi);
        if k == 0 {
            continue;
        }
        total += k;
        stack.push((alo, i, blo, j));
        stack.push((i + k, ahi, j + k, bhi));
    }
    total
}

/// Gestalt pattern matching ratio `2M / (|a| + |b|)`.
///
/// The recursive block matching depends on argument order, so the larger
/// of the two orders is returned to keep the measure symmetric.
pub fn ratcliff_obershelp(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let m = matched_chars(&a, &b).max(matched_chars(&b, &a));
    2.0 * m as f64 / total as f64
}

/// `1 - levenshtein / max_len` over characters, floored at 0.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 1.0;
    }
    (1.0 - strsim::levenshtein(a, b) as f64 / len as f64).max(0.0)
}

/// Maximum of the two similarity measures on normalized names.
pub fn name_similarity(a: &str, b: &str) -> Result<f64> {
    let (a, b) = (normalize_name(a), normalize_name(b));
    if a.is_empty() || b.is_empty() {
        return Err(invalid("cannot compare an empty name"));
    }
    if a == b {
        return Ok(1.0);
    }
    Ok(ratcliff_obershelp(&a, &b).max(levenshtein_similarity(&a, &b)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EntityMapping {
    /// Raw A name to raw B name.
    pub mapping: BTreeMap<String, String>,
    /// A names mapped through the override file.
    pub manual: BTreeSet<String>,
    pub candidates: Vec<MatchCandidate>,
    pub unresolved: Vec<NamedEntity>,
}

impl EntityMapping {
    pub fn get(&self, a_name: &str) -> Option<&str> {
        self.mapping.get(a_name).map(String::as_str)
    }

    pub fn auto_count(&self) -> usize {
        self.mapping.len() - self.manual.len()
    }

    /// Map remaining unresolved entities using override rows of the same kind.
    pub fn apply_overrides(&mut self, kind: EntityKind, overrides: &[OverrideRow]) {
        let table: BTreeMap<String, &str> = overrides
            .iter()
            .filter(|o| o.kind == kind)
            .map(|o| (normalize_name(&o.source_name), o.target_name.as_str()))
            .collect();
        let mut still = Vec::new();
        for e in std::mem::take(&mut self.unresolved) {
            match table.get(&normalize_name(&e.raw_name)) {
                Some(target) => {
                    self.mapping.insert(e.raw_name.clone(), target.to_string());
                    self.manual.insert(e.raw_name);
                }
                None => still.push(e),
            }
        }
        self.unresolved = still;
    }
}

/// Map each A entity to its most similar B entity when the best score is
/// above the threshold and the runner-up is below it. Two A entities
/// claiming the same B entity are both left unresolved.
pub fn map_entities(list_a: &[NamedEntity], list_b: &[NamedEntity]) -> Result<EntityMapping> {
    let kinds: BTreeSet<EntityKind> = list_a.iter().chain(list_b).map(|e| e.entity_kind).collect();
    if kinds.len() > 1 {
        return Err(invalid("map_entities needs entities of a single kind"));
    }
    let mut out = EntityMapping::default();
    let mut claims: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut accepted: Vec<Option<usize>> = vec![None; list_a.len()];
    for (ia, a) in list_a.iter().enumerate() {
        let mut scored: Vec<(f64, usize)> = list_b
            .iter()
            .enumerate()
            .map(|(ib, b)| name_similarity(&a.raw_name, &b.raw_name).map(|s| (s, ib)))
            .collect::<Result<_>>()?;
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let Some(&(best, ib)) = scored.first() else { continue };
        let second = scored.get(1).map_or(0.0, |s| s.0);
        let auto = best > AUTO_ACCEPT && second < AUTO_ACCEPT;
        out.candidates.push(MatchCandidate { left: a.clone(), right: list_b[ib].clone(), score: best, auto_accepted: auto });
        if auto {
            accepted[ia] = Some(ib);
            claims.entry(list_b[ib].raw_name.clone()).or_default().push(ia);
        }
    }
    for (ia, a) in list_a.iter().enumerate() {
        match accepted[ia] {
            Some(ib) if claims[&list_b[ib].raw_name].len() == 1 => {
                out.mapping.insert(a.raw_name.clone(), list_b[ib].raw_name.clone());
            }
            Some(_) => {
                out.candidates[ia].auto_accepted = false;
                out.unresolved.push(a.clone());
            }
            None => out.unresolved.push(a.clone()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverrideRow {
    pub kind: EntityKind,
    pub source_name: String,
    pub target_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub game_id: String,
    pub date: NaiveDate,
    pub home_team: String,
    pub away_team: String,
}

/// One kick as delivered by either source. Only the identifying fields are
/// required; annotation fields are filled from whichever side has them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePenalty {
    pub kick_id: String,
    pub game_id: String,
    pub taker: String,
    #[serde(default)]
    pub keeper: Option<String>,
    pub minute: u32,
    #[serde(default)]
    pub is_shootout: bool,
    #[serde(default)]
    pub shootout_kick_index: Option<u32>,
    #[serde(default)]
    pub shootout_team_kick_index: Option<u32>,
    #[serde(default)]
    pub goal_diff: Option<i32>,
    #[serde(default)]
    pub foot: Option<Foot>,
    #[serde(default)]
    pub taker_strategy: Option<TakerStrategy>,
    #[serde(default)]
    pub end_x: Option<f64>,
    #[serde(default)]
    pub end_z: Option<f64>,
    pub outcome: Outcome,
    /// Kick direction relative to the taker's foot, when the source gives
    /// it directly; otherwise derived from `end_x` and `foot`.
    #[serde(default)]
    pub direction: Option<Zone>,
    #[serde(default)]
    pub keeper_dive_zone: Option<DiveZone>,
    #[serde(default)]
    pub keeper_timing: Option<DiveTiming>,
}

impl SourcePenalty {
    pub fn kick_direction(&self) -> Option<Zone> {
        self.direction.or_else(|| Some(Zone::from_direction(self.end_x?, self.foot?)))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceData {
    pub games: Vec<GameRow>,
    pub penalties: Vec<SourcePenalty>,
}

impl SourceData {
    /// Reads `games.csv` and `penalties.csv` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let open = |name: &str| {
            std::fs::File::open(dir.join(name)).map_err(|e| invalid(format!("{}: {e}", dir.join(name).display())))
        };
        Ok(SourceData { games: read_csv(open("games.csv")?)?, penalties: read_csv(open("penalties.csv")?)? })
    }
}

pub fn load_overrides(path: &Path) -> Result<Vec<OverrideRow>> {
    read_csv(std::fs::File::open(path)?)
}

fn swapped(d: NaiveDate) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(d.year(), d.day(), d.month())
}

/// Equal, one day apart, or equal after swapping day and month.
pub fn dates_compatible(a: NaiveDate, b: NaiveDate) -> bool {
    (a - b).num_days().abs() <= 1 || swapped(a) == Some(b)
}

fn team_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GamePair {
    pub game_a: String,
    pub game_b: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GameMatching {
    pub pairs: Vec<GamePair>,
    /// A games with an unmapped team.
    pub unmapped_teams: Vec<String>,
    /// A games with mapped teams but no counterpart.
    pub unmatched: Vec<String>,
}

/// Pair games by mapped (unordered) team pair and tolerant date.
pub fn map_games(games_a: &[GameRow], games_b: &[GameRow], teams: &EntityMapping) -> Result<GameMatching> {
    let mut by_pair: BTreeMap<(String, String), Vec<&GameRow>> = BTreeMap::new();
    for g in games_b {
        by_pair.entry(team_pair(&g.home_team, &g.away_team)).or_default().push(g);
    }
    let mut out = GameMatching::default();
    let mut claimed: BTreeMap<&str, &str> = BTreeMap::new();
    let mut sorted_a: Vec<&GameRow> = games_a.iter().collect();
    sorted_a.sort_by(|x, y| x.game_id.cmp(&y.game_id));
    for g in sorted_a {
        let (Some(h), Some(a)) = (teams.get(&g.home_team), teams.get(&g.away_team)) else {
            out.unmapped_teams.push(g.game_id.clone());
            continue;
        };
        let hits: Vec<&GameRow> = by_pair
            .get(&team_pair(h, a))
            .map(|v| v.iter().copied().filter(|b| dates_compatible(g.date, b.date)).collect())
            .unwrap_or_default();
        match hits.as_slice() {
            [] => out.unmatched.push(g.game_id.clone()),
            [b] => {
                if let Some(other) = claimed.insert(&b.game_id, &g.game_id) {
                    return Err(Error::AmbiguousGame {
                        game: b.game_id.clone(),
                        candidates: vec![other.to_string(), g.game_id.clone()],
                    });
                }
                out.pairs.push(GamePair { game_a: g.game_id.clone(), game_b: b.game_id.clone() });
            }
            many => {
                return Err(Error::AmbiguousGame {
                    game: g.game_id.clone(),
                    candidates: many.iter().map(|b| b.game_id.clone()).collect(),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KickMatching {
    /// (A kick id, B kick id).
    pub pairs: Vec<(String, String)>,
    pub unresolved_a: Vec<String>,
    pub unresolved_b: Vec<String>,
}

/// Pair the kicks of one matched game.
///
/// Candidates share the mapped taker and lie within `tolerance` minutes.
/// Several candidates are narrowed by result, then direction, then foot;
/// a filter that would leave none is skipped.
pub fn map_penalties(penalties_a: &[&SourcePenalty], penalties_b: &[&SourcePenalty], players: &EntityMapping, tolerance: u32) -> KickMatching {
    let mut chosen: Vec<Option<usize>> = Vec::with_capacity(penalties_a.len());
    for a in penalties_a {
        let Some(taker_b) = players.get(&a.taker) else {
            chosen.push(None);
            continue;
        };
        let mut cands: Vec<usize> = (0..penalties_b.len())
            .filter(|j| {
                let b = penalties_b[*j];
                b.taker == taker_b && a.minute.abs_diff(b.minute) <= tolerance
            })
            .collect();
        let filters: [&dyn Fn(&SourcePenalty) -> bool; 3] = [
            &|b| b.outcome == a.outcome,
            &|b| b.kick_direction().is_some() && b.kick_direction() == a.kick_direction(),
            &|b| b.foot.is_some() && b.foot == a.foot,
        ];
        for f in filters {
            if cands.len() <= 1 {
                break;
            }
            let narrowed: Vec<usize> = cands.iter().copied().filter(|j| f(penalties_b[*j])).collect();
            if !narrowed.is_empty() {
                cands = narrowed;
            }
        }
        chosen.push(if cands.len() == 1 { Some(cands[0]) } else { None });
    }
    let mut claims = vec![0usize; penalties_b.len()];
    for j in chosen.iter().flatten() {
        claims[*j] += 1;
    }
    let mut out = KickMatching::default();
    let mut used = vec![false; penalties_b.len()];
    for (a, c) in penalties_a.iter().zip(&chosen) {
        match c {
            Some(j) if claims[*j] == 1 => {
                used[*j] = true;
                out.pairs.push((a.kick_id.clone(), penalties_b[*j].kick_id.clone()));
            }
            _ => out.unresolved_a.push(a.kick_id.clone()),
        }
    }
    for (b, u) in penalties_b.iter().zip(&used) {
        if !u {
            out.unresolved_b.push(b.kick_id.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub auto: usize,
    pub manual: usize,
    pub unresolved: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeReport {
    pub teams: StageCounts,
    pub games_matched: usize,
    pub games_unmatched: usize,
    pub players: StageCounts,
    pub kicks_matched: usize,
    pub kicks_unresolved_a: usize,
    pub kicks_unresolved_b: usize,
    pub unresolved_teams: Vec<String>,
    pub unresolved_players: Vec<String>,
    pub unresolved_kicks: Vec<String>,
}

impl MergeReport {
    /// Share of A teams mapped without an override.
    pub fn auto_team_rate(&self) -> f64 {
        let total = self.teams.auto + self.teams.manual + self.teams.unresolved;
        if total == 0 {
            0.0
        } else {
            self.teams.auto as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutput {
    pub records: Vec<PenaltyRecord>,
    pub report: MergeReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeConfig {
    pub time_tolerance: u32,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig { time_tolerance: DEFAULT_TIME_TOLERANCE }
    }
}

fn entities(names: impl IntoIterator<Item = String>, source: Source, kind: EntityKind) -> Result<Vec<NamedEntity>> {
    let set: BTreeSet<String> = names.into_iter().collect();
    set.iter().map(|n| NamedEntity::new(source, n, kind)).collect()
}

fn merged_record(a: &SourcePenalty, b: &SourcePenalty, date: NaiveDate) -> PenaltyRecord {
    let is_shootout = a.is_shootout || b.is_shootout;
    let goal_diff = a.goal_diff.or(b.goal_diff).unwrap_or(0);
    let foot = a.foot.or(b.foot).unwrap_or_else(|| {
        log::warn!("kick {}: foot unknown in both sources, assuming right", a.kick_id);
        Foot::Right
    });
    let (end_x, end_z) = if a.end_x.is_some() { (a.end_x, a.end_z) } else { (b.end_x, b.end_z) };
    PenaltyRecord {
        kick_id: a.kick_id.clone(),
        match_id: a.game_id.clone(),
        taker_id: a.taker.clone(),
        keeper_id: a.keeper.clone().or_else(|| b.keeper.clone()).unwrap_or_else(|| "unknown".into()),
        minute: a.minute,
        is_shootout,
        shootout_kick_index: if is_shootout { a.shootout_kick_index.or(b.shootout_kick_index) } else { None },
        shootout_team_kick_index: if is_shootout { a.shootout_team_kick_index.or(b.shootout_team_kick_index) } else { None },
        goal_diff,
        foot,
        taker_strategy: a.taker_strategy.or(b.taker_strategy).unwrap_or(TakerStrategy::Unknown),
        end_x,
        end_z,
        outcome: a.outcome,
        keeper_dive_zone: a.keeper_dive_zone.or(b.keeper_dive_zone).unwrap_or(DiveZone::Unknown),
        keeper_timing: a.keeper_timing.or(b.keeper_timing).unwrap_or(DiveTiming::Unknown),
        pressure: pressure_label(is_shootout, a.minute, goal_diff),
        date: Some(date),
    }
}

/// Full merge of two sources. Output is sorted by game then kick and is
/// identical across runs for identical inputs.
pub fn merge(a: &SourceData, b: &SourceData, overrides: &[OverrideRow], config: &MergeConfig) -> Result<MergeOutput> {
    let teams_a = entities(a.games.iter().flat_map(|g| [g.home_team.clone(), g.away_team.clone()]), Source::A, EntityKind::Team)?;
    let teams_b = entities(b.games.iter().flat_map(|g| [g.home_team.clone(), g.away_team.clone()]), Source::B, EntityKind::Team)?;
    let mut teams = map_entities(&teams_a, &teams_b)?;
    teams.apply_overrides(EntityKind::Team, overrides);
    let games = map_games(&a.games, &b.games, &teams)?;

    let mut pens_a: BTreeMap<&str, Vec<&SourcePenalty>> = BTreeMap::new();
    for p in &a.penalties {
        pens_a.entry(p.game_id.as_str()).or_default().push(p);
    }
    let mut pens_b: BTreeMap<&str, Vec<&SourcePenalty>> = BTreeMap::new();
    for p in &b.penalties {
        pens_b.entry(p.game_id.as_str()).or_default().push(p);
    }
    let date_of: BTreeMap<&str, NaiveDate> = a.games.iter().map(|g| (g.game_id.as_str(), g.date)).collect();

    struct GameResult {
        records: Vec<PenaltyRecord>,
        players: EntityMapping,
        kicks: KickMatching,
    }
    let per_game: Vec<GameResult> = games
        .pairs
        .par_iter()
        .map(|pair| {
            let ka = pens_a.get(pair.game_a.as_str()).cloned().unwrap_or_default();
            let kb = pens_b.get(pair.game_b.as_str()).cloned().unwrap_or_default();
            let pa = entities(ka.iter().map(|p| p.taker.clone()), Source::A, EntityKind::Player)?;
            let pb = entities(kb.iter().map(|p| p.taker.clone()), Source::B, EntityKind::Player)?;
            let mut players = map_entities(&pa, &pb)?;
            players.apply_overrides(EntityKind::Player, overrides);
            let kicks = map_penalties(&ka, &kb, &players, config.time_tolerance);
            let by_id_b: BTreeMap<&str, &SourcePenalty> = kb.iter().map(|p| (p.kick_id.as_str(), *p)).collect();
            let by_id_a: BTreeMap<&str, &SourcePenalty> = ka.iter().map(|p| (p.kick_id.as_str(), *p)).collect();
            let date = date_of[pair.game_a.as_str()];
            let records = kicks
                .pairs
                .iter()
                .map(|(ia, ib)| merged_record(by_id_a[ia.as_str()], by_id_b[ib.as_str()], date))
                .collect();
            Ok(GameResult { records, players, kicks })
        })
        .collect::<Result<_>>()?;

    let mut report = MergeReport {
        teams: StageCounts { auto: teams.auto_count(), manual: teams.manual.len(), unresolved: teams.unresolved.len() },
        games_matched: games.pairs.len(),
        games_unmatched: games.unmatched.len() + games.unmapped_teams.len(),
        unresolved_teams: teams.unresolved.iter().map(|e| e.raw_name.clone()).collect(),
        ..Default::default()
    };
    let mut records = Vec::new();
    for g in per_game {
        report.players.auto += g.players.auto_count();
        report.players.manual += g.players.manual.len();
        report.players.unresolved += g.players.unresolved.len();
        report.unresolved_players.extend(g.players.unresolved.iter().map(|e| e.raw_name.clone()));
        report.kicks_matched += g.kicks.pairs.len();
        report.kicks_unresolved_a += g.kicks.unresolved_a.len();
        report.kicks_unresolved_b += g.kicks.unresolved_b.len();
        report.unresolved_kicks.extend(g.kicks.unresolved_a.iter().cloned());
        records.extend(g.records);
    }
    report.unresolved_players.sort();
    report.unresolved_players.dedup();
    records.sort_by(|x, y| {
        (x.date, &x.match_id, x.is_shootout, x.minute, x.shootout_kick_index, &x.kick_id)
            .cmp(&(y.date, &y.match_id, y.is_shootout, y.minute, y.shootout_kick_index, &y.kick_id))
    });
    Ok(MergeOutput { records, report })
}
