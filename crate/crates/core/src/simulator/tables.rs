//! Population statistics estimated from training kicks.

use serde::{Deserialize, Serialize};

use crate::domain::*;
use crate::error::{invalid, Result};

/// Early-dive corner mix used when no data overrides it: the observed keeper
/// mix (0.359 natural, 0.256 nonnatural) renormalized over the two corners.
pub const DEFAULT_EARLY_MIX: [f64; 2] = [0.584, 0.416];

/// End location in the kicker's frame: `x` is positive toward the natural
/// corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeLocation {
    pub x: f64,
    pub z: f64,
}

impl RelativeLocation {
    pub fn of(record: &PenaltyRecord) -> Option<Self> {
        let (x, z) = record.coordinates()?;
        Some(RelativeLocation { x: x * natural_corner_sign(record.foot), z })
    }

    /// Distance to a keeper standing `offset` meters toward the natural corner.
    pub fn distance_from(&self, offset: f64) -> f64 {
        distance_to_keeper(offset, self.x, self.z)
    }
}

/// Fraction with its support.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: usize,
    pub total: usize,
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }

    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.hits += hit as usize;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTables {
    /// Correct-corner rate indexed `[timing][strategy]`, timing 0 = early,
    /// 1 = late, strategy 0 = independent, 1 = dependent.
    pub p_correct: [[Rate; 2]; 2],
    /// (natural, nonnatural) share of early corner dives.
    pub early_mix: [f64; 2],
    /// Zone shares of keeper-independent on-target kicks.
    pub independent_zone_mix: [f64; 3],
    /// Share of keeper-dependent kicks, in game (0) and in shootouts (1).
    pub dependent_share: [f64; 2],
    pub dependent_locations: Vec<RelativeLocation>,
    /// Keeper-independent on-target end locations per zone.
    pub independent_locations: [Vec<RelativeLocation>; 3],
}

impl Default for EmpiricalTables {
    fn default() -> Self {
        EmpiricalTables {
            p_correct: Default::default(),
            early_mix: DEFAULT_EARLY_MIX,
            independent_zone_mix: [0.395 / 0.794, 0.115 / 0.794, 0.284 / 0.794],
            dependent_share: [0.212, 0.151],
            dependent_locations: Vec::new(),
            independent_locations: Default::default(),
        }
    }
}

impl EmpiricalTables {
    /// Estimate every table from `records`. Entries without support keep
    /// their defaults.
    pub fn estimate(records: &[PenaltyRecord]) -> Self {
        let mut t = EmpiricalTables::default();
        let mut early = [0usize; 2];
        let mut zones = [0usize; 3];
        let mut dependent = [Rate::default(); 2];
        for r in records {
            let strategy = match r.taker_strategy {
                TakerStrategy::Independent => 0,
                TakerStrategy::Dependent => 1,
                TakerStrategy::Unknown => continue,
            };
            dependent[r.is_shootout as usize].add(strategy == 1);
            let Some(zone) = r.zone() else { continue };
            let loc = RelativeLocation::of(r).expect("zone implies coordinates");
            if strategy == 1 {
                t.dependent_locations.push(loc);
            } else {
                zones[zone.index()] += 1;
                t.independent_locations[zone.index()].push(loc);
            }
            let timing = match r.keeper_timing {
                DiveTiming::Early => 0,
                DiveTiming::Late => 1,
                DiveTiming::Unknown => continue,
            };
            if let Some(dive) = r.keeper_dive_zone.zone() {
                t.p_correct[timing][strategy].add(dive == zone);
                if timing == 0 && dive.is_corner() {
                    early[(dive == Zone::NonNatural) as usize] += 1;
                }
            }
        }
        let early_total = early[0] + early[1];
        if early_total > 0 {
            t.early_mix = [early[0] as f64 / early_total as f64, early[1] as f64 / early_total as f64];
        }
        let zone_total: usize = zones.iter().sum();
        if zone_total > 0 {
            t.independent_zone_mix = zones.map(|z| z as f64 / zone_total as f64);
        }
        for (slot, rate) in t.dependent_share.iter_mut().zip(dependent) {
            if let Some(v) = rate.value() {
                *slot = v;
            }
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        check_mix("early_mix", &self.early_mix)?;
        check_mix("independent_zone_mix", &self.independent_zone_mix)?;
        for p in self.dependent_share {
            check_probability("dependent_share", p)?;
        }
        Ok(())
    }

    /// Mean reach probability over dependent-kick end locations.
    pub fn dependent_save_given_correct(&self, offset: f64, range: f64, params: &UncertaintyParams) -> Result<f64> {
        mean_reach(&self.dependent_locations, offset, range, params)
            .ok_or_else(|| invalid("no keeper-dependent end locations in the tables"))
    }

    /// Mean reach probability over independent end locations in `zone`.
    pub fn zone_save_given_correct(&self, zone: Zone, offset: f64, range: f64, params: &UncertaintyParams) -> Result<f64> {
        mean_reach(&self.independent_locations[zone.index()], offset, range, params)
            .ok_or_else(|| invalid(format!("no keeper-independent end locations for zone {zone:?}")))
    }

    /// Keeper profile whose correct-corner probabilities come from the tables.
    pub fn profile(&self, early_range: f64, late_range: Option<f64>) -> GoalkeeperProfile {
        let or = |r: Rate, d: f64| r.value().unwrap_or(d);
        GoalkeeperProfile {
            early_range,
            late_range,
            p_late_correct_independent: or(self.p_correct[1][0], 0.5),
            p_late_correct_dependent: or(self.p_correct[1][1], 0.5),
            p_early_correct_dependent: or(self.p_correct[0][1], 0.05),
            start_offset: 0.0,
        }
    }
}

fn mean_reach(locations: &[RelativeLocation], offset: f64, range: f64, params: &UncertaintyParams) -> Option<f64> {
    if locations.is_empty() {
        return None;
    }
    let sum: f64 = locations
        .iter()
        .map(|l| super::reach_probability(l.distance_from(offset), range, params.mu, params.rho))
        .sum();
    Some(sum / locations.len() as f64)
}
