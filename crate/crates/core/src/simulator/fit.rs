//! Grid search for dive ranges and reach uncertainty.
//!
//! Only kicks where the keeper reached the correct corner with a known
//! timing carry information about reach, so those are the fitting set. The
//! keeper is assumed to start at the goal center.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reach_probability;
use crate::domain::*;
use crate::error::{invalid, Result};
use crate::models::{calibration_bins, CalibrationBin};

/// Candidate values for each parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitGrid {
    pub early_ranges: Vec<f64>,
    pub late_ranges: Vec<f64>,
    pub mus: Vec<f64>,
    pub rhos: Vec<f64>,
}

fn tenths(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|v| v as f64 / 10.0).collect()
}

impl Default for FitGrid {
    /// Ranges 2.5 to 3.5 m, μ and ρ 0.5 to 1.0, all in steps of 0.1.
    fn default() -> Self {
        FitGrid { early_ranges: tenths(25, 35), late_ranges: tenths(25, 35), mus: tenths(5, 10), rhos: tenths(5, 10) }
    }
}

impl FitGrid {
    pub fn single(early: f64, late: f64, mu: f64, rho: f64) -> Self {
        FitGrid { early_ranges: vec![early], late_ranges: vec![late], mus: vec![mu], rhos: vec![rho] }
    }

    fn validate(&self) -> Result<()> {
        let nonempty = [&self.early_ranges, &self.late_ranges, &self.mus, &self.rhos];
        if nonempty.iter().any(|g| g.is_empty()) {
            return Err(invalid("every fit grid needs at least one value"));
        }
        if self.early_ranges.iter().chain(&self.late_ranges).any(|r| !(*r > 0.0)) {
            return Err(invalid("ranges must be > 0"));
        }
        if self.mus.iter().any(|m| !(*m >= 0.0)) {
            return Err(invalid("mu must be >= 0"));
        }
        for &rho in &self.rhos {
            check_probability("rho", rho)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyFit {
    pub early_range: f64,
    /// `None` when no late dive reached the correct corner.
    pub late_range: Option<f64>,
    pub params: UncertaintyParams,
    pub brier: f64,
    pub n_early: usize,
    pub n_late: usize,
    pub calibration: Vec<CalibrationBin>,
}

/// (distance to center, saved) for one eligible kick.
#[derive(Debug, Clone, Copy)]
struct Obs {
    d: f64,
    saved: bool,
}

/// Fitting set split by timing, sorted so sums do not depend on record order.
fn eligible(records: &[PenaltyRecord]) -> [Vec<Obs>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for r in records {
        let (Some(zone), Some(dive)) = (r.zone(), r.keeper_dive_zone.zone()) else { continue };
        let slot = match r.keeper_timing {
            DiveTiming::Early => 0,
            DiveTiming::Late => 1,
            DiveTiming::Unknown => continue,
        };
        if zone == dive {
            let d = r.distance_from_center().expect("on target");
            out[slot].push(Obs { d, saved: r.outcome == Outcome::Saved });
        }
    }
    for obs in &mut out {
        obs.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.saved.cmp(&b.saved)));
    }
    out
}

fn squared_error_sum(obs: &[Obs], r: f64, mu: f64, rho: f64) -> f64 {
    obs.iter().map(|o| (reach_probability(o.d, r, mu, rho) - o.saved as u8 as f64).powi(2)).sum()
}

/// Exhaustive search minimizing the Brier score of the reach model against
/// the saved indicator. Ties go to the lexicographically smallest
/// (early range, late range, μ, ρ). Late ranges above the early range are
/// skipped.
pub fn fit_uncertainty(records: &[PenaltyRecord], grid: &FitGrid) -> Result<UncertaintyFit> {
    grid.validate()?;
    let [early, late] = eligible(records);
    if early.is_empty() && late.is_empty() {
        return Err(invalid("no on-target kicks with a correct dive and known timing"));
    }

    // Per (μ, ρ) the objective separates into an early and a late sum.
    let mut cells = Vec::new();
    for (mi, &mu) in grid.mus.iter().enumerate() {
        for (pi, &rho) in grid.rhos.iter().enumerate() {
            for (ri, &r) in grid.early_ranges.iter().enumerate() {
                cells.push((0usize, ri, mi, pi, r, mu, rho));
            }
            for (ri, &r) in grid.late_ranges.iter().enumerate() {
                cells.push((1usize, ri, mi, pi, r, mu, rho));
            }
        }
    }
    let sums: Vec<f64> = cells
        .par_iter()
        .map(|&(t, _, _, _, r, mu, rho)| squared_error_sum(if t == 0 { &early } else { &late }, r, mu, rho))
        .collect();
    let (nm, np) = (grid.mus.len(), grid.rhos.len());
    let mut table = [vec![0.0; grid.early_ranges.len() * nm * np], vec![0.0; grid.late_ranges.len() * nm * np]];
    for (&(t, ri, mi, pi, ..), s) in cells.iter().zip(sums) {
        table[t][(ri * nm + mi) * np + pi] = s;
    }

    let mut order_e: Vec<usize> = (0..grid.early_ranges.len()).collect();
    let mut order_l: Vec<usize> = (0..grid.late_ranges.len()).collect();
    let mut order_m: Vec<usize> = (0..nm).collect();
    let mut order_p: Vec<usize> = (0..np).collect();
    order_e.sort_by(|a, b| grid.early_ranges[*a].total_cmp(&grid.early_ranges[*b]));
    order_l.sort_by(|a, b| grid.late_ranges[*a].total_cmp(&grid.late_ranges[*b]));
    order_m.sort_by(|a, b| grid.mus[*a].total_cmp(&grid.mus[*b]));
    order_p.sort_by(|a, b| grid.rhos[*a].total_cmp(&grid.rhos[*b]));
    // Without late observations the late range is free; pin it to the first value.
    if late.is_empty() {
        order_l.truncate(1);
    }

    let mut best: Option<(f64, usize, usize, usize, usize)> = None;
    for &ei in &order_e {
        for &li in &order_l {
            if !late.is_empty() && grid.late_ranges[li] > grid.early_ranges[ei] {
                continue;
            }
            for &mi in &order_m {
                for &pi in &order_p {
                    let total = table[0][(ei * nm + mi) * np + pi] + table[1][(li * nm + mi) * np + pi];
                    if best.is_none_or(|b| total < b.0) {
                        best = Some((total, ei, li, mi, pi));
                    }
                }
            }
        }
    }
    let (total, ei, li, mi, pi) = best.ok_or_else(|| invalid("every late range in the grid exceeds every early range"))?;
    let (r_e, r_l, mu, rho) = (grid.early_ranges[ei], grid.late_ranges[li], grid.mus[mi], grid.rhos[pi]);

    let mut probs = Vec::with_capacity(early.len() + late.len());
    let mut saved = Vec::with_capacity(probs.capacity());
    for (obs, r) in [(&early, r_e), (&late, r_l)] {
        for o in obs.iter() {
            probs.push(reach_probability(o.d, r, mu, rho));
            saved.push(o.saved);
        }
    }
    Ok(UncertaintyFit {
        early_range: r_e,
        late_range: (!late.is_empty()).then_some(r_l),
        params: UncertaintyParams { mu, rho },
        brier: total / probs.len() as f64,
        n_early: early.len(),
        n_late: late.len(),
        calibration: calibration_bins(&probs, &saved, 10)?,
    })
}
