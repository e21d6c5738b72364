use penaltysim::datagen::{generate, planted_truth, GeneratorConfig};
use penaltysim::*;

fn within_3_sigma(observed: f64, p: f64, n: usize) -> bool {
    (observed - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn default_conversion_rate() {
    let recs = generate(&GeneratorConfig { n_kicks: 100_000, seed: 0, ..Default::default() }).unwrap();
    let conversion = recs.iter().filter(|r| r.outcome == Outcome::Goal).count() as f64 / recs.len() as f64;
    assert!((conversion - 0.779).abs() <= 0.01, "{conversion}");
    let on_target: Vec<_> = recs.iter().filter(|r| r.on_target()).collect();
    let saves = on_target.iter().filter(|r| r.outcome == Outcome::Saved).count() as f64 / on_target.len() as f64;
    assert!((0.15..0.19).contains(&saves), "{saves}");
    let mean_d = on_target.iter().filter(|r| r.zone().unwrap().is_corner()).map(|r| r.distance_from_center().unwrap()).sum::<f64>()
        / on_target.iter().filter(|r| r.zone().unwrap().is_corner()).count() as f64;
    assert!((2.5..=3.0).contains(&mean_d), "{mean_d}");
}

#[test]
fn fractions_converge_to_config() {
    let cfg = GeneratorConfig { n_kicks: 50_000, seed: 9, taker_bias_concentration: None, shootout_fraction: 0.0, ..Default::default() };
    let recs = generate(&cfg).unwrap();
    let n = recs.len();
    let frac = |f: &dyn Fn(&PenaltyRecord) -> bool| recs.iter().filter(|r| f(r)).count() as f64 / n as f64;
    assert!(within_3_sigma(frac(&|r| r.taker_strategy == TakerStrategy::Dependent), cfg.p_dependent, n));
    assert!(within_3_sigma(frac(&|r| r.keeper_timing == DiveTiming::Late), cfg.p_late_dive, n));
    assert!(within_3_sigma(frac(&|r| r.outcome != Outcome::OffTarget), cfg.p_on_target, n));

    let independent: Vec<_> = recs.iter().filter(|r| r.taker_strategy == TakerStrategy::Independent).collect();
    let total: f64 = cfg.direction_mix.iter().sum();
    for zone in Zone::ALL {
        let p = cfg.direction_mix[zone.index()] / total;
        let observed = independent.iter().filter(|r| r.direction() == Some(zone)).count() as f64 / independent.len() as f64;
        assert!(within_3_sigma(observed, p, independent.len()), "{zone:?}: {observed} vs {p}");
    }
}

#[test]
fn coordinates_and_outcomes_are_consistent() {
    let cfg = GeneratorConfig { n_kicks: 20_000, seed: 4, ..Default::default() };
    let (truth, params) = planted_truth(&cfg);
    for r in generate(&cfg).unwrap() {
        r.validate().unwrap();
        let (x, z) = r.coordinates().unwrap();
        assert_eq!(r.on_target(), in_goal_mouth(x, z), "{}", r.kick_id);
        if r.outcome == Outcome::Saved {
            assert_eq!(r.keeper_dive_zone.zone(), r.zone());
            let range = if r.keeper_timing == DiveTiming::Late { truth.late_range.unwrap() } else { truth.early_range };
            assert!(r.distance_from_center().unwrap() <= range + params.mu);
        }
    }
}

#[test]
fn within_reach_saves_happen_at_rate_rho() {
    let cfg = GeneratorConfig { n_kicks: 60_000, seed: 12, ..Default::default() };
    let (truth, params) = planted_truth(&cfg);
    let mut n = 0usize;
    let mut saved = 0usize;
    for r in generate(&cfg).unwrap() {
        let (Some(zone), Some(dive)) = (r.zone(), r.keeper_dive_zone.zone()) else { continue };
        let range = if r.keeper_timing == DiveTiming::Late { truth.late_range.unwrap() } else { truth.early_range };
        if zone == dive && r.distance_from_center().unwrap() < range - params.mu {
            n += 1;
            saved += (r.outcome == Outcome::Saved) as usize;
        }
    }
    assert!(n > 2000, "{n}");
    assert!(within_3_sigma(saved as f64 / n as f64, params.rho, n));
}

#[test]
fn certain_reach_without_uncertainty() {
    let mut cfg = GeneratorConfig { n_kicks: 5000, seed: 2, ..Default::default() };
    cfg.keeper_truth.params = UncertaintyParams { mu: 0.0, rho: 1.0 };
    let (truth, _) = planted_truth(&cfg);
    for r in generate(&cfg).unwrap() {
        let (Some(zone), Some(dive)) = (r.zone(), r.keeper_dive_zone.zone()) else { continue };
        let range = if r.keeper_timing == DiveTiming::Late { truth.late_range.unwrap() } else { truth.early_range };
        if zone == dive {
            assert_eq!(r.outcome == Outcome::Saved, r.distance_from_center().unwrap() <= range, "{}", r.kick_id);
        }
    }
}
