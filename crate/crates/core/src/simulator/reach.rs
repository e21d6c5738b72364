//! Probability of stopping a ball after diving to the correct corner.

use crate::domain::UncertaintyParams;
use crate::error::{invalid, Result};

/// Save probability for a ball ending `distance` meters from the keeper's
/// start when the dive reaches `range` meters.
///
/// Inside `range - mu` the keeper saves with probability `rho`; beyond
/// `range + mu` never; in between the probability falls linearly. With
/// `mu = 0` this is a step at `range`.
pub fn p_save_given_correct(distance: f64, range: f64, params: &UncertaintyParams) -> Result<f64> {
    params.validate()?;
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(invalid(format!("distance must be >= 0, got {distance}")));
    }
    if !(range > 0.0) || !range.is_finite() {
        return Err(invalid(format!("dive range must be > 0, got {range}")));
    }
    Ok(reach_probability(distance, range, params.mu, params.rho))
}

/// Unchecked form of [`p_save_given_correct`] for inner loops.
#[inline]
pub fn reach_probability(distance: f64, range: f64, mu: f64, rho: f64) -> f64 {
    if mu == 0.0 {
        return if distance <= range { rho } else { 0.0 };
    }
    if distance > range + mu {
        0.0
    } else if distance < range - mu {
        rho
    } else {
        // Rounding near the band edges can step just outside [0, rho].
        (rho * (0.5 - (distance - range) / (2.0 * mu))).max(0.0).min(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PARAMS: UncertaintyParams = UncertaintyParams { mu: 0.7, rho: 0.7 };

    #[test]
    fn regimes() {
        let r = 3.1;
        assert_eq!(p_save_given_correct(r + 0.7 + 0.01, r, &PARAMS).unwrap(), 0.0);
        assert_eq!(p_save_given_correct(r - 0.7 - 0.01, r, &PARAMS).unwrap(), 0.7);
        assert!((p_save_given_correct(r, r, &PARAMS).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn band_edges_stay_in_bounds() {
        // 3.0 + 0.7 lands exactly on 3.7 while 3.7 - 3.0 does not return 0.7.
        assert_eq!(reach_probability(3.7, 3.0, 0.7, 0.7), 0.0);
        assert!(reach_probability(3.0, 2.3, 0.7, 0.7) >= 0.0);
        assert!(reach_probability(74.0 * 0.05, 3.0, 0.7, 0.7) >= reach_probability(75.0 * 0.05, 3.0, 0.7, 0.7));
    }

    #[test]
    fn step_when_mu_is_zero() {
        let p = UncertaintyParams { mu: 0.0, rho: 0.9 };
        assert_eq!(p_save_given_correct(2.8, 2.8, &p).unwrap(), 0.9);
        assert_eq!(p_save_given_correct(2.8001, 2.8, &p).unwrap(), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(p_save_given_correct(-0.1, 3.0, &PARAMS).is_err());
        assert!(p_save_given_correct(1.0, 0.0, &PARAMS).is_err());
        assert!(p_save_given_correct(1.0, 3.0, &UncertaintyParams { mu: -0.1, rho: 0.5 }).is_err());
        assert!(p_save_given_correct(1.0, 3.0, &UncertaintyParams { mu: 0.1, rho: 1.5 }).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, r1 in 0.5f64..4.0, r2 in 0.5f64..4.0,
                                mu in 0.0f64..1.0, rho in 0.0f64..=1.0) {
            let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let (rl, rh) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let f = |d, r| reach_probability(d, r, mu, rho);
            prop_assert!(f(dl, rl) >= f(dh, rl));
            prop_assert!(f(dl, rl) <= f(dl, rh));
            prop_assert!((0.0..=rho).contains(&f(dl, rl)));
        }
    }
}
