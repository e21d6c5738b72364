//! Synthetic penalty datasets with a planted keeper and taker population.
//!
//! Each kick is generated as: pick a taker, pick a strategy, pick the
//! keeper's timing and (for early dives) committed corner, pick the kick
//! zone, place the ball in that zone, and resolve the outcome with the reach
//! model under the planted keeper parameters. Everything is driven by a
//! single seed.

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::domain::*;
use crate::error::{invalid, Result};
use crate::shootout;
use crate::simulator::reach::reach_probability;

/// Mean and spread of a normal truncated to an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
}

/// Per-zone placement of the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndLocationModel {
    /// |x| of center kicks, truncated to [0, 1.22).
    pub center_abs_x: TruncatedNormal,
    /// Population distribution of each taker's mean corner depth |x|.
    pub taker_corner_depth: TruncatedNormal,
    /// Kick-to-kick spread of |x| around the taker's own depth.
    pub corner_kick_sd: f64,
    /// Height, truncated to [0, 2.44].
    pub height: TruncatedNormal,
}

impl Default for EndLocationModel {
    fn default() -> Self {
        EndLocationModel {
            center_abs_x: TruncatedNormal { mean: 0.3, sd: 0.5 },
            taker_corner_depth: TruncatedNormal { mean: 2.88, sd: 0.6 },
            corner_kick_sd: 0.2,
            height: TruncatedNormal { mean: 0.55, sd: 0.55 },
        }
    }
}

/// Keeper parameters used to resolve outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeeperTruth {
    pub profile: GoalkeeperProfile,
    pub params: UncertaintyParams,
}

impl Default for KeeperTruth {
    fn default() -> Self {
        KeeperTruth {
            profile: GoalkeeperProfile {
                early_range: 3.1,
                late_range: Some(2.8),
                p_late_correct_independent: 0.55,
                p_late_correct_dependent: 0.45,
                // Doubles as the dependent taker's mishit probability.
                p_early_correct_dependent: 0.05,
                start_offset: 0.0,
            },
            params: UncertaintyParams { mu: 0.7, rho: 0.7 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_kicks: usize,
    /// Target share of kicks taken in shootouts.
    pub shootout_fraction: f64,
    pub p_dependent: f64,
    pub p_late_dive: f64,
    /// Share of early dives that commit to the natural corner.
    pub keeper_early_natural: f64,
    /// (natural, center, nonnatural) for keeper-independent kicks.
    pub direction_mix: [f64; 3],
    pub p_on_target: f64,
    pub p_right_foot: f64,
    /// Share of kicks whose keeper timing is annotated.
    pub p_timing_recorded: f64,
    pub end_location_model: EndLocationModel,
    pub keeper_truth: KeeperTruth,
    pub taker_pool: usize,
    pub keeper_pool: usize,
    /// Dirichlet concentration of per-taker direction biases around
    /// `direction_mix`; `None` gives every taker the population mix.
    pub taker_bias_concentration: Option<f64>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_kicks: 10_000,
            shootout_fraction: 0.153,
            p_dependent: 0.206,
            p_late_dive: 0.385,
            keeper_early_natural: 0.584,
            // Observed kicker mix (0.395, 0.115, 0.284) renormalized over
            // independent kicks.
            direction_mix: [0.395 / 0.794, 0.115 / 0.794, 0.284 / 0.794],
            p_on_target: 0.935,
            p_right_foot: 0.8,
            p_timing_recorded: 1.0,
            end_location_model: EndLocationModel::default(),
            keeper_truth: KeeperTruth::default(),
            taker_pool: 400,
            keeper_pool: 150,
            taker_bias_concentration: Some(3.0),
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("shootout_fraction", self.shootout_fraction),
            ("p_dependent", self.p_dependent),
            ("p_late_dive", self.p_late_dive),
            ("keeper_early_natural", self.keeper_early_natural),
            ("p_on_target", self.p_on_target),
            ("p_right_foot", self.p_right_foot),
            ("p_timing_recorded", self.p_timing_recorded),
        ] {
            check_probability(name, p)?;
        }
        check_mix("direction_mix", &self.direction_mix)?;
        self.keeper_truth.profile.validate()?;
        self.keeper_truth.params.validate()?;
        if self.keeper_truth.profile.late_range.is_none() && self.p_late_dive > 0.0 {
            return Err(invalid("p_late_dive > 0 needs a planted late_range"));
        }
        if self.n_kicks > 0 && (self.taker_pool == 0 || self.keeper_pool == 0) {
            return Err(invalid("taker_pool and keeper_pool must be positive"));
        }
        if let Some(c) = self.taker_bias_concentration {
            if !(c > 0.0) {
                return Err(invalid("taker_bias_concentration must be > 0"));
            }
        }
        let m = &self.end_location_model;
        for (name, t) in [
            ("center_abs_x", m.center_abs_x),
            ("taker_corner_depth", m.taker_corner_depth),
            ("height", m.height),
        ] {
            if !(t.sd > 0.0) || !t.mean.is_finite() {
                return Err(invalid(format!("{name}: sd must be > 0 and mean finite")));
            }
        }
        if !(m.corner_kick_sd > 0.0) {
            return Err(invalid("corner_kick_sd must be > 0"));
        }
        Ok(())
    }
}

/// The keeper parameters planted in a configuration.
pub fn planted_truth(config: &GeneratorConfig) -> (GoalkeeperProfile, UncertaintyParams) {
    (config.keeper_truth.profile.clone(), config.keeper_truth.params)
}

struct Taker {
    id: String,
    foot: Foot,
    mix: [f64; 3],
    corner_depth: f64,
}

fn truncated_normal<R: Rng>(rng: &mut R, t: TruncatedNormal, lo: f64, hi: f64) -> f64 {
    let normal = Normal::new(t.mean, t.sd).expect("validated sd");
    for _ in 0..64 {
        let v = normal.sample(rng);
        if v >= lo && v <= hi {
            return v;
        }
    }
    rng.random_range(lo..=hi)
}

fn sample_index<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn build_takers(config: &GeneratorConfig) -> Vec<Taker> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let depth = config.end_location_model.taker_corner_depth;
    (0..config.taker_pool)
        .map(|i| {
            let foot = if rng.random_bool(config.p_right_foot) { Foot::Right } else { Foot::Left };
            let mix = match config.taker_bias_concentration {
                None => config.direction_mix,
                Some(c) => {
                    let mut g = [0.0; 3];
                    for (k, slot) in g.iter_mut().enumerate() {
                        let alpha = (c * config.direction_mix[k]).max(1e-6);
                        *slot = Gamma::new(alpha, 1.0).expect("positive shape").sample(&mut rng);
                    }
                    let total: f64 = g.iter().sum();
                    if total > 0.0 {
                        g.map(|v| v / total)
                    } else {
                        config.direction_mix
                    }
                }
            };
            Taker {
                id: format!("T{i:05}"),
                foot,
                mix,
                corner_depth: truncated_normal(&mut rng, depth, ZONE_BOUNDARY + 0.2, GOAL_HALF_WIDTH - 0.05),
            }
        })
        .collect()
}

/// Average shootout length used to turn the kick share into an event share.
const MEAN_SHOOTOUT_KICKS: f64 = 11.0;
const START_DATE: (i32, u32, u32) = (2012, 1, 1);
const MATCHES_PER_DAY: usize = 3;

struct Generator<'a> {
    config: &'a GeneratorConfig,
    takers: Vec<Taker>,
    rng: ChaCha8Rng,
    records: Vec<PenaltyRecord>,
}

struct KickContext {
    match_id: String,
    keeper_id: String,
    date: NaiveDate,
    minute: u32,
    goal_diff: i32,
    shootout: Option<(u32, u32)>,
}

impl<'a> Generator<'a> {
    fn kick(&mut self, taker_idx: usize, ctx: &KickContext) -> Outcome {
        let cfg = self.config;
        let truth = &cfg.keeper_truth.profile;
        let rng = &mut self.rng;
        let taker = &self.takers[taker_idx];

        let dependent = rng.random_bool(cfg.p_dependent);
        let late = rng.random_bool(cfg.p_late_dive);
        let committed = if rng.random_bool(cfg.keeper_early_natural) {
            Zone::Natural
        } else {
            Zone::NonNatural
        };

        let (zone, keeper_zone) = match (dependent, late) {
            (true, false) => {
                let zone = if rng.random_bool(truth.p_early_correct_dependent) {
                    committed
                } else {
                    committed.opposite()
                };
                (zone, committed)
            }
            (true, true) => {
                let natural_share = taker.mix[0] / (taker.mix[0] + taker.mix[2]).max(1e-12);
                let zone = if rng.random_bool(natural_share.clamp(0.0, 1.0)) {
                    Zone::Natural
                } else {
                    Zone::NonNatural
                };
                let keeper = if rng.random_bool(truth.p_late_correct_dependent) {
                    zone
                } else {
                    zone.opposite()
                };
                (zone, keeper)
            }
            (false, false) => (Zone::from_index(sample_index(rng, &taker.mix)).unwrap(), committed),
            (false, true) => {
                let zone = Zone::from_index(sample_index(rng, &taker.mix)).unwrap();
                let keeper = if rng.random_bool(truth.p_late_correct_independent) {
                    zone
                } else {
                    let others: Vec<Zone> = Zone::ALL.into_iter().filter(|z| *z != zone).collect();
                    others[rng.random_range(0..others.len())]
                };
                (zone, keeper)
            }
        };

        let model = &cfg.end_location_model;
        let on_target = rng.random_bool(cfg.p_on_target);
        let abs_x = match zone {
            Zone::Center => truncated_normal(rng, model.center_abs_x, 0.0, ZONE_BOUNDARY - 1e-6),
            _ => truncated_normal(
                rng,
                TruncatedNormal { mean: taker.corner_depth, sd: model.corner_kick_sd },
                ZONE_BOUNDARY,
                GOAL_HALF_WIDTH,
            ),
        };
        let mut z = truncated_normal(rng, model.height, 0.0, GOAL_HEIGHT);
        let mut abs_x = abs_x;
        if !on_target {
            if zone.is_corner() && rng.random_bool(0.6) {
                abs_x = GOAL_HALF_WIDTH + rng.random_range(0.05..0.7);
            } else {
                z = GOAL_HEIGHT + rng.random_range(0.05..0.8);
            }
        }
        let natural_sign = natural_corner_sign(taker.foot);
        let x = match zone {
            Zone::Natural => natural_sign * abs_x,
            Zone::NonNatural => -natural_sign * abs_x,
            Zone::Center => {
                if rng.random_bool(0.5) {
                    abs_x
                } else {
                    -abs_x
                }
            }
        };

        let outcome = if !on_target {
            Outcome::OffTarget
        } else if keeper_zone == zone {
            let start_x = truth.start_offset * natural_sign;
            let d = distance_to_keeper(start_x, x, z);
            let range = if late { truth.late_range.unwrap_or(truth.early_range) } else { truth.early_range };
            let p = reach_probability(d, range, cfg.keeper_truth.params.mu, cfg.keeper_truth.params.rho);
            if rng.random_bool(p.clamp(0.0, 1.0)) {
                Outcome::Saved
            } else {
                Outcome::Goal
            }
        } else {
            Outcome::Goal
        };

        let timing_known = rng.random_bool(cfg.p_timing_recorded);
        let is_shootout = ctx.shootout.is_some();
        let record = PenaltyRecord {
            kick_id: format!("K{:07}", self.records.len()),
            match_id: ctx.match_id.clone(),
            taker_id: taker.id.clone(),
            keeper_id: ctx.keeper_id.clone(),
            minute: ctx.minute,
            is_shootout,
            shootout_kick_index: ctx.shootout.map(|s| s.0),
            shootout_team_kick_index: ctx.shootout.map(|s| s.1),
            goal_diff: ctx.goal_diff,
            foot: taker.foot,
            taker_strategy: if dependent { TakerStrategy::Dependent } else { TakerStrategy::Independent },
            end_x: Some(x),
            end_z: Some(z),
            outcome,
            keeper_dive_zone: if timing_known { keeper_zone.into() } else { DiveZone::Unknown },
            keeper_timing: match (timing_known, late) {
                (false, _) => DiveTiming::Unknown,
                (true, true) => DiveTiming::Late,
                (true, false) => DiveTiming::Early,
            },
            pressure: pressure_label(is_shootout, ctx.minute, ctx.goal_diff),
            date: Some(ctx.date),
        };
        self.records.push(record);
        outcome
    }

    fn run(mut self) -> Vec<PenaltyRecord> {
        let cfg = self.config;
        let f = cfg.shootout_fraction;
        let p_shootout_event = if f >= 1.0 { 1.0 } else { f / (MEAN_SHOOTOUT_KICKS * (1.0 - f) + f) };
        let start = NaiveDate::from_ymd_opt(START_DATE.0, START_DATE.1, START_DATE.2).unwrap();
        let goal_diffs = [(-2, 0.08), (-1, 0.22), (0, 0.40), (1, 0.20), (2, 0.10)];
        let mut event = 0usize;
        while self.records.len() < cfg.n_kicks {
            let date = start + Days::new((event / MATCHES_PER_DAY) as u64);
            let match_id = format!("M{event:06}");
            let keeper_id = format!("G{:04}", self.rng.random_range(0..cfg.keeper_pool));
            if self.rng.random_bool(p_shootout_event) {
                let opp_keeper = format!("G{:04}", self.rng.random_range(0..cfg.keeper_pool));
                let mut goals = [0u32; 2];
                let mut kicks = [0u32; 2];
                let mut k = 0u32;
                while self.records.len() < cfg.n_kicks && k < 40 {
                    let team = (k % 2) as usize;
                    k += 1;
                    let taker = self.rng.random_range(0..self.takers.len());
                    let ctx = KickContext {
                        match_id: match_id.clone(),
                        keeper_id: if team == 0 { keeper_id.clone() } else { opp_keeper.clone() },
                        date,
                        minute: 120,
                        goal_diff: 0,
                        shootout: Some((k, kicks[team] + 1)),
                    };
                    let outcome = self.kick(taker, &ctx);
                    kicks[team] += 1;
                    if outcome == Outcome::Goal {
                        goals[team] += 1;
                    }
                    if shootout::decided(goals[0], kicks[0], goals[1], kicks[1]).is_some() {
                        break;
                    }
                }
            } else {
                let weights: Vec<f64> = goal_diffs.iter().map(|g| g.1).collect();
                let goal_diff = goal_diffs[sample_index(&mut self.rng, &weights)].0;
                let ctx = KickContext {
                    match_id,
                    keeper_id,
                    date,
                    minute: self.rng.random_range(1..=95),
                    goal_diff,
                    shootout: None,
                };
                let taker = self.rng.random_range(0..self.takers.len());
                self.kick(taker, &ctx);
            }
            event += 1;
        }
        self.records
    }
}

/// Generate `config.n_kicks` records. Deterministic given `config.seed`.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<PenaltyRecord>> {
    config.validate()?;
    if config.n_kicks == 0 {
        return Ok(Vec::new());
    }
    let generator = Generator {
        config,
        takers: build_takers(config),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        records: Vec::with_capacity(config.n_kicks),
    };
    Ok(generator.run())
}
