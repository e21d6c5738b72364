use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use penaltysim::gametheory::DEFAULT_PAYOFFS;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_penaltysim"));
    for var in ["PENALTYSIM_RECORDS", "PENALTYSIM_TABLES", "PENALTYSIM_DIRECTION_MODEL", "PENALTYSIM_DISTANCE_MODEL"] {
        c.env_remove(var);
    }
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/linkage").join(name)
}

#[test]
fn generate_zero_kicks_writes_an_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["generate", "--n", "0", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("records.csv")).unwrap().len(), 0);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["generate", "--n", "5", "--seed", "1", "--bogus"],
        vec!["frobnicate"],
        vec!["generate", "--n", "5"],
        vec!["advise", "--context", "c.json", "--early-range", "3.1"],
        vec!["train", "--task", "direction", "--records", "r.csv", "--out", "m.json", "--tune"],
        vec!["simulate", "--records", "r.csv", "--early-range", "3.1", "--policy", "sideways"],
    ] {
        assert_eq!(run(dir.path(), &args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn missing_model_is_named() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "--n", "300", "--seed", "2", "--out", "r.csv"]);
    let missing = dir.path().join("nowhere/direction.json");
    let out = run(
        dir.path(),
        &["simulate", "--records", "r.csv", "--early-range", "3.1", "--policy", "early_educated", "--direction-model", missing.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing model artifact") && err.contains("nowhere/direction.json"), "{err}");

    // Same through the environment override.
    let out = bin()
        .current_dir(dir.path())
        .env("PENALTYSIM_DIRECTION_MODEL", "env-dir.json")
        .args(["simulate", "--records", "r.csv", "--early-range", "3.1", "--policy", "early_educated"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("env-dir.json"));

    // Without any path the message names the flag.
    let out = run(dir.path(), &["simulate", "--records", "r.csv", "--early-range", "3.1", "--policy", "early_educated"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--direction-model"));

    // Late diving needs a late range.
    let out = run(dir.path(), &["simulate", "--records", "r.csv", "--early-range", "3.1", "--policy", "late"]);
    assert_eq!(out.status.code(), Some(1));
}

fn parse_mixes(stdout: &[u8]) -> (f64, Vec<f64>, Vec<f64>) {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut value = f64::NAN;
    let (mut kicker, mut keeper) = (Vec::new(), Vec::new());
    for line in text.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        match cols[0] {
            "value" => value = cols[1].parse().unwrap(),
            "kicker" => kicker.push(cols[2].parse().unwrap()),
            "keeper" => keeper.push(cols[2].parse().unwrap()),
            _ => panic!("unexpected line {line}"),
        }
    }
    (value, kicker, keeper)
}

#[test]
fn solve_game_reads_both_payoff_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let plain: String = DEFAULT_PAYOFFS.iter().map(|r| format!("{},{},{}\n", r[0], r[1], r[2])).collect();
    let labelled = format!(
        ",GK N,GK Late,GK NN\n{}",
        ["N", "C", "NN", "Dep"].iter().zip(DEFAULT_PAYOFFS).map(|(l, r)| format!("{l},{},{},{}\n", r[0], r[1], r[2])).collect::<String>()
    );
    std::fs::write(dir.path().join("plain.csv"), plain).unwrap();
    std::fs::write(dir.path().join("labelled.csv"), labelled).unwrap();
    let a = parse_mixes(&ok(dir.path(), &["solve-game", "--payoff", "plain.csv"]));
    let b = parse_mixes(&ok(dir.path(), &["solve-game", "--payoff", "labelled.csv"]));
    assert_eq!(a, b);
    let (value, kicker, keeper) = a;
    for (got, want) in keeper.iter().zip([0.069, 0.871, 0.060]) {
        assert!((got - want).abs() <= 0.005, "{keeper:?}");
    }
    for (got, want) in kicker.iter().zip([0.431, 0.0, 0.357, 0.211]) {
        assert!((got - want).abs() <= 0.005, "{kicker:?}");
    }
    assert!((value - 0.782).abs() < 0.001);

    let json: serde_json::Value = serde_json::from_slice(&ok(dir.path(), &["solve-game", "--payoff", "labelled.csv", "--json"])).unwrap();
    assert_eq!(json["keeper"]["actions"][1], "GK Late");

    std::fs::write(dir.path().join("bad.csv"), "1,2,x\n").unwrap();
    assert_eq!(run(dir.path(), &["solve-game", "--payoff", "bad.csv"]).status.code(), Some(1));
}

#[test]
fn merge_writes_records_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture("team_variant");
    let args = |out: &str| {
        vec![
            "merge".to_string(),
            "--source-a".into(),
            src.join("a").display().to_string(),
            "--source-b".into(),
            src.join("b").display().to_string(),
            "--overrides".into(),
            src.join("overrides.csv").display().to_string(),
            "--out".into(),
            out.into(),
        ]
    };
    let first: Vec<String> = args("m1.csv");
    let report = ok(dir.path(), &first.iter().map(String::as_str).collect::<Vec<_>>());
    let second: Vec<String> = args("m2.csv");
    let again = ok(dir.path(), &second.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(report, again);
    let json: serde_json::Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(json["games_matched"], 3);
    assert_eq!(json["teams"]["manual"], 1);
    let m1 = std::fs::read(dir.path().join("m1.csv")).unwrap();
    assert_eq!(m1, std::fs::read(dir.path().join("m2.csv")).unwrap());
    assert_eq!(penaltysim::io::load_records(&dir.path().join("m1.csv")).unwrap().len(), 3);
}

/// Every subcommand downstream of `generate`, with artifacts kept in `dir`.
fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let ctx = r#"{"minute": 75, "foot": "left", "pens_taken": 9, "pens_scored": 7, "pct_to_natural": 55.0, "pct_to_nonnatural": 35.0, "pct_to_center": 10.0, "avg_dist_from_center": 2.7}"#;
    std::fs::write(dir.join("ctx.json"), ctx).unwrap();
    let models = ["--tables", "tables.json", "--direction-model", "dir.json", "--distance-model", "dist.json"];
    let keeper = ["--early-range", "3.1", "--late-range", "2.8", "--p-late", "0.6"];
    let with = |base: &[&str], extra: &[&[&str]]| -> Vec<String> {
        base.iter().chain(extra.iter().flat_map(|e| e.iter())).map(|s| s.to_string()).collect()
    };
    let steps: Vec<(&str, Vec<String>)> = vec![
        ("generate", with(&["generate", "--n", "3000", "--seed", "11", "--out", "r.csv"], &[])),
        ("featurize", with(&["featurize", "--records", "r.csv", "--out", "f.csv"], &[])),
        ("train-direction", with(&["train", "--task", "direction", "--records", "r.csv", "--features", "f.csv", "--out", "dir.json", "--n-trees", "20", "--tables-out", "tables.json"], &[])),
        ("train-distance", with(&["train", "--task", "distance", "--records", "r.csv", "--features", "f.csv", "--out", "dist.json", "--n-trees", "20"], &[])),
        ("simulate", with(&["simulate", "--records", "r.csv", "--features", "f.csv", "--gt-mix", "0.1,0.8,0.1", "--gt-sample", "--seed", "5", "--out", "kicks.csv"], &[&models, &keeper])),
        ("sweep-ranges", with(&["sweep-ranges", "--records", "r.csv", "--situation", "in-game"], &[&models])),
        ("sweep-offset", with(&["sweep-offset", "--records", "r.csv", "--natural-only", "--offsets", "-0.1,0,0.2"], &[&models, &keeper])),
        ("fit-uncertainty", with(&["fit-uncertainty", "--records", "r.csv", "--mus", "0.6,0.7", "--rhos", "0.7"], &[])),
        ("advise", with(&["advise", "--context", "ctx.json", "--seed", "3"], &[&models, &keeper])),
        ("evaluate-models", with(&["evaluate-models", "--task", "distance", "--records", "r.csv", "--folds", "3", "--seed", "4", "--learning-rates", "0.1", "--max-depths", "2", "--n-trees", "10,20"], &[])),
    ];
    let mut outputs = Vec::new();
    for (name, args) in steps {
        let stdout = ok(dir, &args.iter().map(String::as_str).collect::<Vec<_>>());
        outputs.push((name.to_string(), stdout));
    }
    for file in ["r.csv", "f.csv", "dir.json", "dist.json", "tables.json", "kicks.csv"] {
        outputs.push((file.to_string(), std::fs::read(dir.join(file)).unwrap()));
    }
    outputs
}

#[test]
fn every_subcommand_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        assert!(x == y, "{name} differs between runs");
    }
    let by_name = |n: &str| &first.iter().find(|(k, _)| k == n).unwrap().1;
    let summary = String::from_utf8(by_name("simulate").clone()).unwrap();
    assert_eq!(summary.lines().next(), Some("policy,n_kicks,aggregate"));
    assert_eq!(summary.lines().count(), 6, "{summary}");
    assert_eq!(String::from_utf8_lossy(by_name("sweep-ranges")).lines().count(), 1 + 4 * 12);
    let advice: serde_json::Value = serde_json::from_slice(by_name("advise")).unwrap();
    assert_eq!(advice["seed"], 3);
    let report: serde_json::Value = serde_json::from_slice(by_name("evaluate-models")).unwrap();
    assert_eq!(report["threshold_accuracy"].as_array().unwrap().len(), 5);
}
