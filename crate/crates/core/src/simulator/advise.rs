//! Per-kick policy advice for one goalkeeper.
//!
//! The kick has not happened yet, so its zone and end location are unknown.
//! Each policy's save probability is an expectation over the zone
//! probabilities (from the direction model when available), the empirical
//! end locations within each zone, and the keeper-dependent share.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::{sample_gt_action, Models};
use super::tables::EmpiricalTables;
use crate::domain::*;
use crate::error::{invalid, Error, Result};
use crate::features::FeatureVector;
use crate::models::{predict_direction, predict_distance};

/// Concrete keeper action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiveAction {
    DiveLate,
    DiveEarlyNatural,
    DiveEarlyCenter,
    DiveEarlyNonnatural,
}

impl DiveAction {
    fn early(zone: Zone) -> Self {
        match zone {
            Zone::Natural => DiveAction::DiveEarlyNatural,
            Zone::Center => DiveAction::DiveEarlyCenter,
            Zone::NonNatural => DiveAction::DiveEarlyNonnatural,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyAdvice {
    pub policy: PolicyKind,
    pub p_save: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub policy: PolicyKind,
    pub action: DiveAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advice {
    /// Available policies in canonical order.
    pub policies: Vec<PolicyAdvice>,
    pub recommended: PolicyKind,
    pub instruction: Instruction,
    pub seed: u64,
    /// Zone probabilities used for the expectation.
    pub zone_probs: [f64; 3],
    pub predicted_distance: Option<f64>,
}

/// Options beyond the keeper profile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdviceOptions {
    /// Extra start offset toward the natural corner.
    #[serde(default)]
    pub offset: f64,
    /// Overrides the tables' mix for the non-educated early policy.
    #[serde(default)]
    pub early_direction_mix: Option<[f64; 2]>,
    /// Enables the game-theoretic policy.
    #[serde(default)]
    pub gt_mix: Option<[f64; 3]>,
}

/// Policies a keeper can run: late diving needs a late range, the
/// game-theoretic policy needs a mix.
pub fn available_policies(gk: &GoalkeeperProfile, gt_mix: Option<[f64; 3]>) -> Vec<PolicyKind> {
    PolicyKind::ALL
        .into_iter()
        .filter(|k| match k {
            PolicyKind::Late | PolicyKind::MixedEducated => gk.can_dive_late(),
            PolicyKind::GameTheoretic => gt_mix.is_some_and(|m| m[1] == 0.0 || gk.can_dive_late()),
            _ => true,
        })
        .collect()
}

struct Terms<'a> {
    tables: &'a EmpiricalTables,
    gk: &'a GoalkeeperProfile,
    params: &'a UncertaintyParams,
    offset: f64,
    q: [f64; 3],
    dependent: f64,
}

impl Terms<'_> {
    fn zone_sgc(&self, zone: Zone, range: f64) -> Result<f64> {
        self.tables.zone_save_given_correct(zone, self.offset, range, self.params)
    }

    /// Σ_z q_z · w_z · sgc_z over zones with positive weight.
    fn independent(&self, weights: [f64; 3], range: f64) -> Result<f64> {
        let mut total = 0.0;
        for zone in Zone::ALL {
            let w = self.q[zone.index()] * weights[zone.index()];
            if w > 0.0 {
                total += w * self.zone_sgc(zone, range)?;
            }
        }
        Ok(total)
    }

    fn dependent_term(&self, p_correct: f64, range: f64) -> Result<f64> {
        if self.dependent == 0.0 || p_correct == 0.0 {
            return Ok(0.0);
        }
        Ok(p_correct * self.tables.dependent_save_given_correct(self.offset, range, self.params)?)
    }

    fn late_range(&self) -> Result<f64> {
        self.gk.late_range.ok_or_else(|| invalid("late dive without a late range"))
    }

    fn late(&self) -> Result<f64> {
        let r = self.late_range()?;
        let pli = self.gk.p_late_correct_independent;
        Ok((1.0 - self.dependent) * self.independent([pli; 3], r)? + self.dependent * self.dependent_term(self.gk.p_late_correct_dependent, r)?)
    }

    fn early_with(&self, correct: [f64; 3]) -> Result<f64> {
        let r = self.gk.early_range;
        Ok((1.0 - self.dependent) * self.independent(correct, r)? + self.dependent * self.dependent_term(self.gk.p_early_correct_dependent, r)?)
    }

    fn game_theoretic(&self, mix: [f64; 3]) -> Result<f64> {
        let early_share = mix[0] + mix[2];
        let r = self.gk.early_range;
        let mut v = (1.0 - self.dependent) * self.independent([mix[0], 0.0, mix[2]], r)?
            + self.dependent * self.dependent_term(early_share * self.gk.p_early_correct_dependent, r)?;
        if mix[1] > 0.0 {
            v += mix[1] * self.late()?;
        }
        Ok(v)
    }
}

fn sample_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return rng.random_range(0..weights.len());
    }
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

/// Expected save probability of every available policy for one kick, the
/// best policy, and an instruction drawn with probability proportional to
/// each policy's save probability.
#[allow(clippy::too_many_arguments)]
pub fn advise(
    features: &FeatureVector,
    gk: &GoalkeeperProfile,
    params: &UncertaintyParams,
    tables: &EmpiricalTables,
    models: Models<'_>,
    options: &AdviceOptions,
    seed: u64,
) -> Result<Advice> {
    gk.validate()?;
    params.validate()?;
    tables.validate()?;
    PolicySpec { kind: PolicyKind::Early, offset: options.offset, early_direction_mix: options.early_direction_mix, gt_mix: options.gt_mix }.validate()?;
    let kinds = available_policies(gk, options.gt_mix);

    let needs_direction = kinds.iter().any(|k| k.needs_direction_model());
    let direction = match models.direction {
        Some(m) => Some(predict_direction(m, features)?),
        None if needs_direction => return Err(Error::MissingModel("direction model".into())),
        None => None,
    };
    let predicted_distance = match models.distance {
        Some(m) if kinds.contains(&PolicyKind::MixedEducated) => Some(predict_distance(m, features)?),
        None if kinds.contains(&PolicyKind::MixedEducated) => return Err(Error::MissingModel("distance model".into())),
        _ => None,
    };
    let shootout = features.get("is_shootout").is_some_and(|v| v == 1.0);
    let q = direction.unwrap_or(tables.independent_zone_mix);
    let terms = Terms { tables, gk, params, offset: gk.start_offset + options.offset, q, dependent: tables.dependent_share[shootout as usize] };
    let mix = options.early_direction_mix.unwrap_or(tables.early_mix);

    let mut policies = Vec::new();
    for &kind in &kinds {
        let p_save = match kind {
            PolicyKind::Late => terms.late()?,
            PolicyKind::Early => terms.early_with([mix[0], 0.0, mix[1]])?,
            PolicyKind::EarlyEducated => terms.early_with(q)?,
            PolicyKind::MixedEducated => {
                if predicted_distance.expect("checked above") <= terms.late_range()? {
                    terms.late()?
                } else {
                    terms.early_with(q)?
                }
            }
            PolicyKind::GameTheoretic => terms.game_theoretic(options.gt_mix.expect("gated"))?,
        };
        policies.push(PolicyAdvice { policy: kind, p_save });
    }
    let mut recommended = &policies[0];
    for p in &policies[1..] {
        if p.p_save > recommended.p_save {
            recommended = p;
        }
    }
    let recommended = recommended.policy;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = policies.iter().map(|p| p.p_save).collect();
    let policy = policies[sample_weighted(&weights, &mut rng)].policy;
    let corner = |rng: &mut ChaCha8Rng| DiveAction::early(Zone::from_index(sample_weighted(&q, rng)).expect("three zones"));
    let action = match policy {
        PolicyKind::Late => DiveAction::DiveLate,
        PolicyKind::Early => {
            if sample_weighted(&mix, &mut rng) == 0 {
                DiveAction::DiveEarlyNatural
            } else {
                DiveAction::DiveEarlyNonnatural
            }
        }
        PolicyKind::EarlyEducated => corner(&mut rng),
        PolicyKind::MixedEducated => {
            if predicted_distance.expect("checked above") <= terms.late_range()? {
                DiveAction::DiveLate
            } else {
                corner(&mut rng)
            }
        }
        PolicyKind::GameTheoretic => match sample_gt_action(options.gt_mix.expect("gated"), &mut rng) {
            0 => DiveAction::DiveEarlyNatural,
            1 => DiveAction::DiveLate,
            _ => DiveAction::DiveEarlyNonnatural,
        },
    };

    Ok(Advice { policies, recommended, instruction: Instruction { policy, action }, seed, zone_probs: q, predicted_distance })
}
