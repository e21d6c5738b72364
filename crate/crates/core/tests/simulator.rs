use penaltysim::datagen::{generate, planted_truth, GeneratorConfig};
use penaltysim::simulator::*;
use penaltysim::*;
use proptest::prelude::*;

fn records(n: usize, seed: u64) -> Vec<PenaltyRecord> {
    generate(&GeneratorConfig { n_kicks: n, seed, ..Default::default() }).unwrap()
}

fn eval(set: &SimulationSet, kind: PolicyKind, gk: &GoalkeeperProfile, params: &UncertaintyParams, tables: &EmpiricalTables) -> PolicyEvaluation {
    evaluate_policy(set, &PolicySpec::new(kind), gk, params, tables, GtMode::Expectation).unwrap()
}

#[test]
fn planted_keeper_reproduces_realized_saves() {
    let cfg = GeneratorConfig { n_kicks: 60_000, seed: 17, ..Default::default() };
    let recs = generate(&cfg).unwrap();
    let (gk, params) = planted_truth(&cfg);
    let tables = EmpiricalTables { early_mix: [cfg.keeper_early_natural, 1.0 - cfg.keeper_early_natural], ..EmpiricalTables::estimate(&recs) };
    let set = SimulationSet::from_outputs(&recs, None, None).unwrap();
    let late = eval(&set, PolicyKind::Late, &gk, &params, &tables).aggregate;
    let early = eval(&set, PolicyKind::Early, &gk, &params, &tables).aggregate;
    let expected = cfg.p_late_dive * late + (1.0 - cfg.p_late_dive) * early;

    let on_target: Vec<_> = recs.iter().filter(|r| r.on_target()).collect();
    let n = on_target.len() as f64;
    let realized = on_target.iter().filter(|r| r.outcome == Outcome::Saved).count() as f64 / n;
    let sigma = (realized * (1.0 - realized) / n).sqrt();
    assert!((expected - realized).abs() < 3.0 * sigma, "expected {expected}, realized {realized}, sigma {sigma}");
}

#[test]
fn degenerate_keeper_saves_nothing() {
    let recs = records(3000, 3);
    let tables = EmpiricalTables::estimate(&recs);
    let set = SimulationSet::from_outputs(&recs, Some(&vec![[0.4, 0.2, 0.4]; recs.len()]), Some(&vec![2.7; recs.len()])).unwrap();
    let params = UncertaintyParams { mu: 0.7, rho: 0.0 };
    let gk = tables.profile(3.1, Some(2.8));
    let gt = PolicySpec::new(PolicyKind::GameTheoretic).with_gt_mix([0.0695, 0.8703, 0.0602]);
    for kind in PolicyKind::ALL {
        let spec = if kind == PolicyKind::GameTheoretic { gt.clone() } else { PolicySpec::new(kind) };
        let e = evaluate_policy(&set, &spec, &gk, &params, &tables, GtMode::Expectation).unwrap();
        assert_eq!(e.aggregate, 0.0, "{kind}");
    }
}

#[test]
fn off_target_kicks_are_skipped() {
    let recs = records(2000, 5);
    let set = SimulationSet::from_outputs(&recs, None, None).unwrap();
    assert_eq!(set.len(), recs.iter().filter(|r| r.on_target()).count());
    let off: Vec<_> = recs.into_iter().filter(|r| !r.on_target()).collect();
    let empty = SimulationSet::from_outputs(&off, None, None).unwrap();
    let tables = EmpiricalTables::default();
    assert!(evaluate_policy(&empty, &PolicySpec::new(PolicyKind::Early), &tables.profile(3.1, None), &UncertaintyParams::default(), &tables, GtMode::Expectation).is_err());
}

#[test]
fn offset_helps_natural_corner_kicks_the_keeper_guessed() {
    let recs = records(8000, 21);
    let tables = EmpiricalTables::estimate(&recs);
    let set = SimulationSet::from_outputs(&recs, Some(&vec![[0.5, 0.2, 0.3]; recs.len()]), Some(&vec![2.7; recs.len()])).unwrap();
    let natural = set.filter(|k| k.zone == Zone::Natural && !k.dependent);
    let gk = tables.profile(3.1, Some(2.7));
    let params = UncertaintyParams::default();
    for kind in [PolicyKind::Late, PolicyKind::Early, PolicyKind::EarlyEducated, PolicyKind::MixedEducated] {
        let runs: Vec<PolicyEvaluation> = DEFAULT_OFFSETS
            .iter()
            .map(|&offset| evaluate_policy(&natural, &PolicySpec { offset, ..PolicySpec::new(kind) }, &gk, &params, &tables, GtMode::Expectation).unwrap())
            .collect();
        for w in runs.windows(2) {
            for (a, b) in w[0].kicks.iter().zip(&w[1].kicks) {
                assert_eq!(a.kick_id, b.kick_id);
                assert!(b.p_save >= a.p_save, "{kind} {}: {} -> {}", a.kick_id, a.p_save, b.p_save);
            }
        }
        assert!(runs[3].aggregate > runs[0].aggregate);
    }
}

#[test]
fn early_range_sweep_is_monotone_for_every_policy() {
    let recs = records(6000, 8);
    let tables = EmpiricalTables::estimate(&recs);
    let n = recs.len();
    let probs: Vec<[f64; 3]> = (0..n).map(|i| if i % 3 == 0 { [0.6, 0.1, 0.3] } else { [0.3, 0.3, 0.4] }).collect();
    let dists: Vec<f64> = (0..n).map(|i| 2.4 + (i % 7) as f64 * 0.1).collect();
    let set = SimulationSet::from_outputs(&recs, Some(&probs), Some(&dists)).unwrap();
    let mut policies: Vec<PolicySpec> = [PolicyKind::Late, PolicyKind::Early, PolicyKind::EarlyEducated, PolicyKind::MixedEducated].map(PolicySpec::new).into();
    policies.push(PolicySpec::new(PolicyKind::GameTheoretic).with_gt_mix([0.0695, 0.8703, 0.0602]));
    let (late, early) = default_range_grid();
    let rows = range_sweep(&set, &policies, &late, &early, &tables.profile(3.1, Some(2.8)), &UncertaintyParams::default(), &tables).unwrap();
    assert_eq!(rows.len(), policies.len() * 12);
    for p in &policies {
        for l in &late {
            let row: Vec<f64> = rows.iter().filter(|r| r.policy == p.kind && r.late_range == *l).map(|r| r.aggregate).collect();
            assert_eq!(row.len(), 3);
            assert!(row.windows(2).all(|w| w[1] >= w[0]), "{} at late {l}: {row:?}", p.kind);
        }
    }
}

fn small_set() -> (SimulationSet, EmpiricalTables) {
    let recs = records(600, 30);
    let tables = EmpiricalTables::estimate(&recs);
    let n = recs.len();
    let probs: Vec<[f64; 3]> = (0..n).map(|i| [0.2 + (i % 5) as f64 * 0.1, 0.1, 0.7 - (i % 5) as f64 * 0.1]).collect();
    let dists: Vec<f64> = (0..n).map(|i| 2.2 + (i % 11) as f64 * 0.1).collect();
    (SimulationSet::from_outputs(&recs, Some(&probs), Some(&dists)).unwrap(), tables)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_kick_invariants(
        early in 2.5f64..3.6,
        late_frac in 0.7f64..1.0,
        p in 0.0f64..=1.0,
        mu in 0.0f64..1.0,
        rho in 0.0f64..=1.0,
        offset in -0.5f64..0.5,
        kind_idx in 0usize..5,
    ) {
        let (set, tables) = small_set();
        let gk = GoalkeeperProfile { early_range: early, late_range: Some(early * late_frac), p_late_correct_independent: p, p_late_correct_dependent: p * 0.8, p_early_correct_dependent: 0.05, start_offset: 0.0 };
        let kind = PolicyKind::ALL[kind_idx];
        let mut spec = PolicySpec { offset, ..PolicySpec::new(kind) };
        if kind == PolicyKind::GameTheoretic {
            spec.gt_mix = Some([0.1, 0.7, 0.2]);
        }
        let params = UncertaintyParams { mu, rho };
        let e = evaluate_policy(&set, &spec, &gk, &params, &tables, GtMode::Expectation).unwrap();
        for k in &e.kicks {
            prop_assert!((k.p_save - k.p_correct * k.p_save_given_correct).abs() <= 1e-12);
            prop_assert!(k.p_save <= k.p_correct.min(rho) + 1e-12);
            for v in [k.p_correct, k.p_save_given_correct, k.p_save] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn aggregate_ignores_kick_order(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let (set, tables) = small_set();
        let mut shuffled = set.clone();
        shuffled.kicks.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let gk = tables.profile(3.1, Some(2.8));
        let params = UncertaintyParams::default();
        for kind in [PolicyKind::Late, PolicyKind::Early, PolicyKind::EarlyEducated, PolicyKind::MixedEducated] {
            let a = eval(&set, kind, &gk, &params, &tables).aggregate;
            let b = eval(&shuffled, kind, &gk, &params, &tables).aggregate;
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn deterministic_timing_ignores_the_rng(seed in any::<u64>(), d in 1.0f64..4.0) {
        use rand::SeedableRng;
        let gk = GoalkeeperProfile { early_range: 3.1, late_range: Some(2.8), p_late_correct_independent: 0.6, p_late_correct_dependent: 0.5, p_early_correct_dependent: 0.05, start_offset: 0.0 };
        for kind in [PolicyKind::Late, PolicyKind::Early, PolicyKind::EarlyEducated, PolicyKind::MixedEducated] {
            let spec = PolicySpec::new(kind);
            let a = decide_timing(&spec, Some(d), &gk, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = decide_timing(&spec, Some(d), &gk, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(1))).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
