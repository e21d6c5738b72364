//! Expected save fraction of a keeper policy over a set of kicks.
//!
//! Per kick, the save probability is the product of the probability of
//! diving to the correct corner and the probability of reaching the ball
//! once there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reach_probability;
use super::tables::{EmpiricalTables, RelativeLocation};
use crate::domain::*;
use crate::error::{invalid, Error, Result};
use crate::features::FeatureVector;
use crate::models::{predict_direction, predict_distance, BoostedModel};

/// One kick prepared for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimKick {
    pub kick_id: String,
    pub zone: Zone,
    pub dependent: bool,
    pub location: RelativeLocation,
    /// Direction model output over (natural, center, nonnatural).
    pub direction_probs: Option<[f64; 3]>,
    /// Distance model output.
    pub predicted_distance: Option<f64>,
}

/// On-target kicks with cached model outputs, shared by every policy run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationSet {
    pub kicks: Vec<SimKick>,
}

/// Trained predictors; either may be absent when no policy needs it.
#[derive(Debug, Clone, Copy, Default)]
pub struct Models<'a> {
    pub direction: Option<&'a BoostedModel>,
    pub distance: Option<&'a BoostedModel>,
}

impl SimulationSet {
    /// Keeps on-target kicks. Kicks with unknown strategy count as
    /// keeper-independent. Optional per-record model outputs are aligned
    /// with `records`.
    pub fn from_outputs(records: &[PenaltyRecord], direction: Option<&[[f64; 3]]>, distance: Option<&[f64]>) -> Result<Self> {
        for (name, len) in [("direction", direction.map(<[_]>::len)), ("distance", distance.map(<[_]>::len))] {
            if let Some(len) = len {
                if len != records.len() {
                    return Err(invalid(format!("{name} outputs do not align with the records")));
                }
            }
        }
        let mut kicks = Vec::new();
        for (i, r) in records.iter().enumerate() {
            let Some(zone) = r.zone() else { continue };
            kicks.push(SimKick {
                kick_id: r.kick_id.clone(),
                zone,
                dependent: r.taker_strategy == TakerStrategy::Dependent,
                location: RelativeLocation::of(r).expect("zone implies coordinates"),
                direction_probs: direction.map(|d| d[i]),
                predicted_distance: distance.map(|d| d[i]),
            });
        }
        Ok(SimulationSet { kicks })
    }

    /// Runs the available models over `features` (aligned with `records`).
    pub fn build(records: &[PenaltyRecord], features: &[FeatureVector], models: Models<'_>) -> Result<Self> {
        if records.len() != features.len() {
            return Err(invalid("records and feature vectors differ in length"));
        }
        let direction = models
            .direction
            .map(|m| features.par_iter().map(|fv| predict_direction(m, fv)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let distance = models
            .distance
            .map(|m| features.par_iter().map(|fv| predict_distance(m, fv)).collect::<Result<Vec<_>>>())
            .transpose()?;
        Self::from_outputs(records, direction.as_deref(), distance.as_deref())
    }

    pub fn len(&self) -> usize {
        self.kicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kicks.is_empty()
    }

    /// Subset of kicks matching `keep`.
    pub fn filter(&self, keep: impl Fn(&SimKick) -> bool) -> Self {
        SimulationSet { kicks: self.kicks.iter().filter(|k| keep(k)).cloned().collect() }
    }
}

/// Correct-corner probability of one dive.
///
/// `policy` matters only for early dives against keeper-independent kicks:
/// the educated kinds take the direction model's probability of the true
/// zone, the others the early corner mix (zero for center kicks).
pub fn p_correct_corner(
    zone: Zone,
    dependent: bool,
    timing: DiveTiming,
    gk: &GoalkeeperProfile,
    early_mix: [f64; 2],
    direction_probs: Option<[f64; 3]>,
    policy: PolicyKind,
) -> Result<f64> {
    match (timing, dependent) {
        (DiveTiming::Late, false) => Ok(gk.p_late_correct_independent),
        (DiveTiming::Late, true) => Ok(gk.p_late_correct_dependent),
        (DiveTiming::Early, true) => Ok(gk.p_early_correct_dependent),
        (DiveTiming::Early, false) => {
            if policy.needs_direction_model() {
                let p = direction_probs.ok_or_else(|| Error::MissingModel("direction model".into()))?;
                Ok(p[zone.index()])
            } else {
                Ok(match zone {
                    Zone::Natural => early_mix[0],
                    Zone::NonNatural => early_mix[1],
                    Zone::Center => 0.0,
                })
            }
        }
        (DiveTiming::Unknown, _) => Err(invalid("dive timing must be early or late")),
    }
}

/// Timing chosen by a policy for one kick. Only the game-theoretic policy
/// draws from `rng`.
pub fn decide_timing<R: Rng>(policy: &PolicySpec, predicted_distance: Option<f64>, gk: &GoalkeeperProfile, rng: &mut R) -> Result<DiveTiming> {
    let late_range = || gk.late_range.ok_or_else(|| invalid(format!("policy {} needs a late dive range", policy.kind)));
    match policy.kind {
        PolicyKind::Late => late_range().map(|_| DiveTiming::Late),
        PolicyKind::Early | PolicyKind::EarlyEducated => Ok(DiveTiming::Early),
        PolicyKind::MixedEducated => {
            let r = late_range()?;
            let d = predicted_distance.ok_or_else(|| Error::MissingModel("distance model".into()))?;
            Ok(if d <= r { DiveTiming::Late } else { DiveTiming::Early })
        }
        PolicyKind::GameTheoretic => {
            let action = sample_gt_action(gt_mix(policy)?, rng);
            if action == 1 {
                late_range()?;
                Ok(DiveTiming::Late)
            } else {
                Ok(DiveTiming::Early)
            }
        }
    }
}

fn gt_mix(policy: &PolicySpec) -> Result<[f64; 3]> {
    policy.gt_mix.ok_or_else(|| invalid("game_theoretic policy requires gt_mix"))
}

/// Index into (natural early, late, nonnatural early).
pub fn sample_gt_action<R: Rng>(mix: [f64; 3], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    if u < mix[0] {
        0
    } else if u < mix[0] + mix[1] {
        1
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickEvaluation {
    pub kick_id: String,
    pub dive_timing_used: DiveTiming,
    pub p_correct: f64,
    pub p_save_given_correct: f64,
    pub p_save: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub policy: PolicySpec,
    /// Mean per-kick save probability.
    pub aggregate: f64,
    pub kicks: Vec<KickEvaluation>,
}

/// How the game-theoretic policy treats its mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GtMode {
    /// Exact expectation over the three actions.
    #[default]
    Expectation,
    /// One sampled action per kick; kick `i` draws from a stream derived
    /// from the seed and `i`, so results do not depend on thread count.
    Sampled(u64),
}

struct Context<'a> {
    policy: &'a PolicySpec,
    gk: &'a GoalkeeperProfile,
    params: &'a UncertaintyParams,
    early_mix: [f64; 2],
    offset: f64,
    dep_early: Option<f64>,
    dep_late: Option<f64>,
}

impl Context<'_> {
    fn save_given_correct(&self, kick: &SimKick, timing: DiveTiming) -> Result<f64> {
        let (range, dep) = match timing {
            DiveTiming::Late => (self.gk.late_range.ok_or_else(|| invalid("late dive without a late range"))?, self.dep_late),
            _ => (self.gk.early_range, self.dep_early),
        };
        if kick.dependent {
            return dep.ok_or_else(|| invalid("no keeper-dependent end locations in the tables"));
        }
        Ok(reach_probability(kick.location.distance_from(self.offset), range, self.params.mu, self.params.rho))
    }

    fn single(&self, kick: &SimKick, timing: DiveTiming) -> Result<(f64, f64)> {
        let pc = p_correct_corner(kick.zone, kick.dependent, timing, self.gk, self.early_mix, kick.direction_probs, self.policy.kind)?;
        Ok((pc, self.save_given_correct(kick, timing)?))
    }

    fn evaluate(&self, index: usize, kick: &SimKick, mode: GtMode) -> Result<KickEvaluation> {
        let done = |timing, p_correct: f64, p_sgc: f64| KickEvaluation {
            kick_id: kick.kick_id.clone(),
            dive_timing_used: timing,
            p_correct,
            p_save_given_correct: p_sgc,
            p_save: p_correct * p_sgc,
        };
        if self.policy.kind != PolicyKind::GameTheoretic {
            let mut unused = NoRng;
            let timing = decide_timing(self.policy, kick.predicted_distance, self.gk, &mut unused)?;
            let (pc, sgc) = self.single(kick, timing)?;
            return Ok(done(timing, pc, sgc));
        }
        let mix = gt_mix(self.policy)?;
        // Correct-corner probability of each of the three actions.
        let corner = |side: Zone| -> f64 {
            if kick.dependent {
                self.gk.p_early_correct_dependent
            } else {
                (kick.zone == side) as u8 as f64
            }
        };
        let pc_actions = [corner(Zone::Natural), 0.0, corner(Zone::NonNatural)];
        match mode {
            GtMode::Sampled(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(index as u64);
                let action = sample_gt_action(mix, &mut rng);
                if action == 1 {
                    let (pc, sgc) = self.single(kick, DiveTiming::Late)?;
                    Ok(done(DiveTiming::Late, pc, sgc))
                } else {
                    Ok(done(DiveTiming::Early, pc_actions[action], self.save_given_correct(kick, DiveTiming::Early)?))
                }
            }
            GtMode::Expectation => {
                let early_sgc = self.save_given_correct(kick, DiveTiming::Early)?;
                let (late_pc, late_sgc) = if mix[1] > 0.0 { self.single(kick, DiveTiming::Late)? } else { (0.0, 0.0) };
                let early_pc = mix[0] * pc_actions[0] + mix[2] * pc_actions[2];
                let p_correct = early_pc + mix[1] * late_pc;
                let p_save = early_pc * early_sgc + mix[1] * late_pc * late_sgc;
                let timing = if mix[1] >= 0.5 { DiveTiming::Late } else { DiveTiming::Early };
                let p_sgc = if p_correct > 0.0 { (p_save / p_correct).min(1.0) } else { 0.0 };
                Ok(KickEvaluation { kick_id: kick.kick_id.clone(), dive_timing_used: timing, p_correct, p_save_given_correct: p_sgc, p_save: p_correct * p_sgc })
            }
        }
    }
}

/// Placeholder generator for policies that never sample.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("deterministic policy drew a random number")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("deterministic policy drew a random number")
    }
    fn fill_bytes(&mut self, _: &mut [u8]) {
        unreachable!("deterministic policy drew a random number")
    }
}

/// Order-independent mean.
fn stable_mean(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Evaluate one policy over every kick in `set`.
///
/// The keeper starts `gk.start_offset + policy.offset` meters toward each
/// kicker's natural corner.
pub fn evaluate_policy(set: &SimulationSet, policy: &PolicySpec, gk: &GoalkeeperProfile, params: &UncertaintyParams, tables: &EmpiricalTables, mode: GtMode) -> Result<PolicyEvaluation> {
    policy.validate()?;
    gk.validate()?;
    params.validate()?;
    if set.is_empty() {
        return Err(invalid("no on-target kicks to evaluate"));
    }
    if policy.kind.uses_late_dive() && !gk.can_dive_late() && !(policy.kind == PolicyKind::GameTheoretic && gt_mix(policy)?[1] == 0.0) {
        return Err(invalid(format!("policy {} needs a late dive range", policy.kind)));
    }
    let offset = gk.start_offset + policy.offset;
    let has_dependent = set.kicks.iter().any(|k| k.dependent);
    let dep = |range: Option<f64>| -> Result<Option<f64>> {
        match range {
            Some(r) if has_dependent => tables.dependent_save_given_correct(offset, r, params).map(Some),
            _ => Ok(None),
        }
    };
    let ctx = Context {
        policy,
        gk,
        params,
        early_mix: policy.early_direction_mix.unwrap_or(tables.early_mix),
        offset,
        dep_early: dep(Some(gk.early_range))?,
        dep_late: dep(gk.late_range)?,
    };
    let kicks: Vec<KickEvaluation> = set
        .kicks
        .par_iter()
        .enumerate()
        .map(|(i, k)| ctx.evaluate(i, k, mode))
        .collect::<Result<_>>()?;
    let aggregate = stable_mean(kicks.iter().map(|k| k.p_save).collect());
    Ok(PolicyEvaluation { policy: policy.clone(), aggregate, kicks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSweepRow {
    pub policy: PolicyKind,
    pub late_range: f64,
    pub early_range: f64,
    pub aggregate: f64,
}

/// One aggregate per (policy, late range, early range). The late range is
/// capped at the early range when a cell would violate the profile invariant.
pub fn range_sweep(set: &SimulationSet, policies: &[PolicySpec], late_ranges: &[f64], early_ranges: &[f64], gk_template: &GoalkeeperProfile, params: &UncertaintyParams, tables: &EmpiricalTables) -> Result<Vec<RangeSweepRow>> {
    if late_ranges.is_empty() || early_ranges.is_empty() {
        return Err(invalid("range grids must be nonempty"));
    }
    let mut cells = Vec::new();
    for p in policies {
        for &late in late_ranges {
            for &early in early_ranges {
                cells.push((p, late, early));
            }
        }
    }
    cells
        .par_iter()
        .map(|(p, late, early)| {
            let gk = GoalkeeperProfile { early_range: *early, late_range: Some(late.min(*early)), ..gk_template.clone() };
            let eval = evaluate_policy(set, p, &gk, params, tables, GtMode::Expectation)?;
            Ok(RangeSweepRow { policy: p.kind, late_range: *late, early_range: *early, aggregate: eval.aggregate })
        })
        .collect()
}

/// Default sweep grids: late ranges 2.6 to 2.9, early ranges 3.0 to 3.2.
pub fn default_range_grid() -> (Vec<f64>, Vec<f64>) {
    ((26..=29).map(|v| v as f64 / 10.0).collect(), (30..=32).map(|v| v as f64 / 10.0).collect())
}

pub const DEFAULT_OFFSETS: [f64; 4] = [0.0, 0.1, 0.2, 0.3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetSweepRow {
    pub policy: PolicyKind,
    pub offset: f64,
    pub aggregate: f64,
}

/// Re-run each policy with the keeper starting `offset` meters toward the
/// natural corner.
pub fn offset_sweep(set: &SimulationSet, policies: &[PolicySpec], offsets: &[f64], gk: &GoalkeeperProfile, params: &UncertaintyParams, tables: &EmpiricalTables) -> Result<Vec<OffsetSweepRow>> {
    let mut out = Vec::new();
    for p in policies {
        for &offset in offsets {
            let spec = PolicySpec { offset, ..p.clone() };
            let eval = evaluate_policy(set, &spec, gk, params, tables, GtMode::Expectation)?;
            out.push(OffsetSweepRow { policy: p.kind, offset, aggregate: eval.aggregate });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gk() -> GoalkeeperProfile {
        GoalkeeperProfile {
            early_range: 3.1,
            late_range: Some(2.8),
            p_late_correct_independent: 0.6,
            p_late_correct_dependent: 0.45,
            p_early_correct_dependent: 0.05,
            start_offset: 0.0,
        }
    }

    fn kick(zone: Zone, x: f64, dependent: bool) -> SimKick {
        SimKick {
            kick_id: format!("{zone:?}{x}"),
            zone,
            dependent,
            location: RelativeLocation { x, z: 0.0 },
            direction_probs: Some([0.5, 0.2, 0.3]),
            predicted_distance: Some(2.6),
        }
    }

    fn tables() -> EmpiricalTables {
        EmpiricalTables { dependent_locations: vec![RelativeLocation { x: 2.5, z: 0.0 }, RelativeLocation { x: -3.5, z: 0.5 }], ..Default::default() }
    }

    #[test]
    fn correct_corner_rules() {
        let g = gk();
        let mix = [0.584, 0.416];
        let probs = Some([0.5, 0.2, 0.3]);
        assert_eq!(p_correct_corner(Zone::Natural, true, DiveTiming::Early, &g, mix, None, PolicyKind::Early).unwrap(), 0.05);
        assert_eq!(p_correct_corner(Zone::Center, false, DiveTiming::Early, &g, [1.0, 0.0], None, PolicyKind::Early).unwrap(), 0.0);
        assert_eq!(p_correct_corner(Zone::Natural, false, DiveTiming::Early, &g, mix, probs, PolicyKind::EarlyEducated).unwrap(), 0.5);
        assert_eq!(p_correct_corner(Zone::NonNatural, false, DiveTiming::Early, &g, mix, None, PolicyKind::Early).unwrap(), 0.416);
        assert_eq!(p_correct_corner(Zone::Center, false, DiveTiming::Late, &g, mix, None, PolicyKind::Late).unwrap(), 0.6);
        assert_eq!(p_correct_corner(Zone::Center, true, DiveTiming::Late, &g, mix, None, PolicyKind::Late).unwrap(), 0.45);
        assert!(matches!(
            p_correct_corner(Zone::Natural, false, DiveTiming::Early, &g, mix, None, PolicyKind::EarlyEducated),
            Err(Error::MissingModel(_))
        ));
    }

    #[test]
    fn timing_decisions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mixed = PolicySpec::new(PolicyKind::MixedEducated);
        assert_eq!(decide_timing(&mixed, Some(2.6), &gk(), &mut rng).unwrap(), DiveTiming::Late);
        assert_eq!(decide_timing(&mixed, Some(3.3), &gk(), &mut rng).unwrap(), DiveTiming::Early);
        assert!(matches!(decide_timing(&mixed, None, &gk(), &mut rng), Err(Error::MissingModel(_))));
        let no_late = GoalkeeperProfile { late_range: None, ..gk() };
        assert!(decide_timing(&PolicySpec::new(PolicyKind::Late), None, &no_late, &mut rng).is_err());
        assert_eq!(decide_timing(&PolicySpec::new(PolicyKind::EarlyEducated), None, &no_late, &mut NoRng).unwrap(), DiveTiming::Early);

        let gt = PolicySpec::new(PolicyKind::GameTheoretic).with_gt_mix([0.069, 0.871, 0.060]);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let late = (0..10_000).filter(|_| decide_timing(&gt, None, &gk(), &mut rng).unwrap() == DiveTiming::Late).count();
        assert!((late as f64 / 10_000.0 - 0.871).abs() < 0.01, "{late}");
    }

    #[test]
    fn everything_reachable_and_guessed() {
        let g = GoalkeeperProfile { early_range: 4.4, late_range: Some(4.4), p_late_correct_independent: 1.0, p_late_correct_dependent: 1.0, p_early_correct_dependent: 1.0, start_offset: 0.0 };
        let params = UncertaintyParams { mu: 0.0, rho: 1.0 };
        let set = SimulationSet { kicks: vec![kick(Zone::Natural, 3.6, false), kick(Zone::Center, 0.3, false), kick(Zone::NonNatural, -2.0, true)] };
        let eval = evaluate_policy(&set, &PolicySpec::new(PolicyKind::Late), &g, &params, &tables(), GtMode::Expectation).unwrap();
        assert_eq!(eval.aggregate, 1.0);
    }

    #[test]
    fn product_of_correct_and_reach() {
        let g = GoalkeeperProfile { p_late_correct_independent: 0.6, ..gk() };
        // Distance exactly at the late range: half of rho.
        let set = SimulationSet { kicks: vec![kick(Zone::Natural, 2.8, false)] };
        let params = UncertaintyParams { mu: 0.7, rho: 1.0 };
        let eval = evaluate_policy(&set, &PolicySpec::new(PolicyKind::Late), &g, &params, &tables(), GtMode::Expectation).unwrap();
        let k = &eval.kicks[0];
        assert!((k.p_correct - 0.6).abs() < 1e-15);
        assert!((k.p_save_given_correct - 0.5).abs() < 1e-15);
        assert!((k.p_save - 0.3).abs() < 1e-15);
    }

    #[test]
    fn dependent_kicks_use_population_locations() {
        let set = SimulationSet { kicks: vec![kick(Zone::Natural, 0.1, true)] };
        let params = UncertaintyParams::default();
        let eval = evaluate_policy(&set, &PolicySpec::new(PolicyKind::Late), &gk(), &params, &tables(), GtMode::Expectation).unwrap();
        let expected = (reach_probability(2.5, 2.8, 0.7, 0.7) + reach_probability(3.5f64.hypot(0.5), 2.8, 0.7, 0.7)) / 2.0;
        assert!((eval.kicks[0].p_save_given_correct - expected).abs() < 1e-15);
        assert!((eval.kicks[0].p_save - 0.45 * expected).abs() < 1e-15);
    }

    #[test]
    fn game_theoretic_expectation_and_sampling() {
        let set = SimulationSet { kicks: (0..2000).map(|i| kick(if i % 2 == 0 { Zone::Natural } else { Zone::NonNatural }, if i % 2 == 0 { 2.0 } else { -2.0 }, false)).collect() };
        let params = UncertaintyParams::default();
        let gt = PolicySpec::new(PolicyKind::GameTheoretic).with_gt_mix([0.3, 0.5, 0.2]);
        let exact = evaluate_policy(&set, &gt, &gk(), &params, &tables(), GtMode::Expectation).unwrap();
        // Every kick is within both ranges: rho * (0.5 * 0.6 + 0.3 or 0.2).
        assert!((exact.aggregate - 0.7 * (0.3 + 0.25)).abs() < 1e-12);
        let sampled = evaluate_policy(&set, &gt, &gk(), &params, &tables(), GtMode::Sampled(9)).unwrap();
        assert!((sampled.aggregate - exact.aggregate).abs() < 0.03);
        assert_eq!(sampled, evaluate_policy(&set, &gt, &gk(), &params, &tables(), GtMode::Sampled(9)).unwrap());
    }

    #[test]
    fn errors() {
        let params = UncertaintyParams::default();
        assert!(evaluate_policy(&SimulationSet::default(), &PolicySpec::new(PolicyKind::Late), &gk(), &params, &tables(), GtMode::Expectation).is_err());
        let set = SimulationSet { kicks: vec![kick(Zone::Natural, 2.0, false)] };
        let no_late = GoalkeeperProfile { late_range: None, ..gk() };
        assert!(evaluate_policy(&set, &PolicySpec::new(PolicyKind::MixedEducated), &no_late, &params, &tables(), GtMode::Expectation).is_err());
        let mut blind = set.clone();
        blind.kicks[0].direction_probs = None;
        assert!(matches!(
            evaluate_policy(&blind, &PolicySpec::new(PolicyKind::EarlyEducated), &gk(), &params, &tables(), GtMode::Expectation),
            Err(Error::MissingModel(_))
        ));
    }

    #[test]
    fn sweep_shapes() {
        let set = SimulationSet { kicks: vec![kick(Zone::Natural, 2.9, false), kick(Zone::NonNatural, -3.2, true), kick(Zone::Center, 0.4, false)] };
        let policies = [PolicySpec::new(PolicyKind::Late), PolicySpec::new(PolicyKind::Early), PolicySpec::new(PolicyKind::MixedEducated)];
        let (late, early) = default_range_grid();
        let rows = range_sweep(&set, &policies, &late, &early, &gk(), &UncertaintyParams::default(), &tables()).unwrap();
        assert_eq!(rows.len(), 3 * 4 * 3);
        for l in &late {
            let late_rows: Vec<f64> = rows.iter().filter(|r| r.policy == PolicyKind::Late && r.late_range == *l).map(|r| r.aggregate).collect();
            assert!(late_rows.windows(2).all(|w| w[0] == w[1]));
        }
        let offs = offset_sweep(&set, &policies, &DEFAULT_OFFSETS, &gk(), &UncertaintyParams::default(), &tables()).unwrap();
        assert_eq!(offs.len(), 12);
        let base = evaluate_policy(&set, &policies[0], &gk(), &UncertaintyParams::default(), &tables(), GtMode::Expectation).unwrap();
        assert_eq!(offs[0].aggregate, base.aggregate);
    }
}
