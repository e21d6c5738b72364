use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use penaltysim::datagen::{generate, GeneratorConfig};
use penaltysim::features::{extract_all, FeatureVector};
use penaltysim::gametheory::DEFAULT_PAYOFFS;
use penaltysim::io::save_records;
use penaltysim::models::{direction_dataset, distance_dataset, train, HyperParams, Task};
use penaltysim::simulator::{evaluate_policy, EmpiricalTables, GtMode, Models, SimulationSet};
use penaltysim::{PenaltyRecord, PolicyKind, PolicySpec, UncertaintyParams};
use penaltysim_cli::api::ServiceState;
use penaltysim_cli::server::router;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Fixture {
    state: Arc<ServiceState>,
    records: Vec<PenaltyRecord>,
    _dir: tempfile::TempDir,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let records = generate(&GeneratorConfig { n_kicks: 2500, seed: 21, ..Default::default() }).unwrap();
        let fvs = extract_all(&records, None).unwrap();
        let hp = HyperParams::new(0.1, 2, 15);
        let fit = |task, (idx, labels): (Vec<usize>, Vec<f64>)| {
            let rows: Vec<&FeatureVector> = idx.iter().map(|i| &fvs[*i]).collect();
            train(task, &rows, &labels, &hp).unwrap()
        };
        let direction = fit(Task::Multiclass3, direction_dataset(&records, &fvs));
        let distance = fit(Task::Regression, distance_dataset(&records, &fvs));
        let dir = tempfile::tempdir().unwrap();
        save_records(&dir.path().join("synthetic.csv"), &records).unwrap();
        let state = ServiceState {
            direction: Some(direction),
            distance: Some(distance),
            tables: Some(EmpiricalTables::estimate(&records)),
            records_dir: Some(dir.path().to_path_buf()),
        };
        Fixture { state: Arc::new(state), records, _dir: dir }
    })
}

async fn call(state: Arc<ServiceState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let resp = router(state).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call_json(state: Arc<ServiceState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(state, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn profile(late: Option<f64>) -> Value {
    json!({
        "early_range": 3.1, "late_range": late,
        "p_late_correct_independent": 0.59, "p_late_correct_dependent": 0.59,
        "p_early_correct_dependent": 0.05
    })
}

fn advise_body(late: Option<f64>, seed: u64) -> Value {
    json!({
        "context": {"minute": 88, "goal_diff": -1, "foot": "right", "pens_taken": 14, "pens_scored": 11,
                    "pct_to_natural": 64.0, "pct_to_nonnatural": 29.0, "pct_to_center": 7.0, "avg_dist_from_center": 2.6},
        "profile": profile(late),
        "seed": seed
    })
}

fn field(body: &Value) -> &str {
    body["fields"][0]["field"].as_str().unwrap()
}

#[tokio::test]
async fn health_and_schema() {
    let f = fixture();
    let (status, body) = call_json(f.state.clone(), "GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["direction_model"], true);
    let (status, body) = call_json(f.state.clone(), "GET", "/schema", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["version"], "1");
    assert_eq!(body["features"].as_array().unwrap().len(), 47);
    assert_eq!(body["feature_schema_hash"], penaltysim::features::schema_hash());
}

#[tokio::test]
async fn solve_game_reproduces_the_reference_mixes() {
    let (status, body) = call_json(Arc::new(ServiceState::default()), "POST", "/solve-game", Some(json!({ "payoff": DEFAULT_PAYOFFS }))).await;
    assert_eq!(status, StatusCode::OK);
    let probs = |side: &str| -> Vec<f64> { body[side]["probabilities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect() };
    for (got, want) in probs("keeper").iter().zip([0.069, 0.871, 0.060]) {
        assert!((got - want).abs() <= 0.005);
    }
    for (got, want) in probs("kicker").iter().zip([0.431, 0.0, 0.357, 0.211]) {
        assert!((got - want).abs() <= 0.005);
    }
    assert_eq!(body["keeper_policy_mix"].as_array().unwrap().len(), 3);

    let (status, body) = call_json(Arc::new(ServiceState::default()), "POST", "/solve-game", Some(json!({ "payoff": [[0.5, 0.2], [0.1]] }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "payoff");
}

#[tokio::test]
async fn advise_gates_on_capacity_and_echoes_seed() {
    let f = fixture();
    let (status, body) = call_json(f.state.clone(), "POST", "/advise", Some(advise_body(None, 9))).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = body["policies"].as_array().unwrap().iter().map(|p| p["policy"].as_str().unwrap()).collect();
    assert_eq!(names, ["early", "early_educated"]);
    assert_eq!(body["seed"], 9);

    let (_, body) = call_json(f.state.clone(), "POST", "/advise", Some(advise_body(Some(2.8), 9))).await;
    let names: Vec<&str> = body["policies"].as_array().unwrap().iter().map(|p| p["policy"].as_str().unwrap()).collect();
    assert_eq!(names, ["late", "early", "early_educated", "mixed_educated"]);
}

#[tokio::test]
async fn advise_is_deterministic_and_concurrency_safe() {
    let f = fixture();
    let serial: Vec<Vec<u8>> = {
        let mut v = Vec::new();
        for seed in 0..8u64 {
            v.push(call(f.state.clone(), "POST", "/advise", Some(advise_body(Some(2.8), seed))).await.1);
        }
        v
    };
    let again = call(f.state.clone(), "POST", "/advise", Some(advise_body(Some(2.8), 0))).await.1;
    assert_eq!(again, serial[0]);

    let tasks: Vec<_> = (0..32u64)
        .map(|i| {
            let state = f.state.clone();
            tokio::spawn(async move { (i % 8, call(state, "POST", "/advise", Some(advise_body(Some(2.8), i % 8))).await.1) })
        })
        .collect();
    for t in tasks {
        let (seed, bytes) = t.await.unwrap();
        assert_eq!(bytes, serial[seed as usize]);
    }
}

#[tokio::test]
async fn advise_accepts_a_feature_vector() {
    let f = fixture();
    let fv = penaltysim::features::KickContext { minute: 30, pens_taken: Some(3), ..Default::default() }.to_features().unwrap();
    let body = json!({"features": fv, "profile": profile(Some(2.8)), "seed": 1});
    let (status, from_features) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let body = json!({"context": {"minute": 30, "pens_taken": 3}, "profile": profile(Some(2.8)), "seed": 1});
    let (_, from_context) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(from_features, from_context);
}

#[tokio::test]
async fn malformed_bodies_get_field_diagnostics() {
    let f = fixture();
    let mut body = advise_body(Some(2.8), 1);
    body["profile"]["early_range"] = json!("far");
    let (status, resp) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&resp), "profile.early_range");

    let mut body = advise_body(Some(2.8), 1);
    body["profile"]["late_range"] = json!(3.5);
    let (status, resp) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&resp), "profile.late_range");

    let mut body = advise_body(None, 1);
    body["context"]["is_shootout"] = json!(true);
    let (status, resp) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&resp), "context.shootout_kick_index");

    let mut body = advise_body(None, 1);
    body["surprise"] = json!(1);
    let (status, _) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let mut body = advise_body(None, 1);
    body.as_object_mut().unwrap().remove("seed");
    let (status, _) = call_json(f.state.clone(), "POST", "/advise", Some(body)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(f.state.clone(), "POST", "/advise", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn missing_artifacts_are_503() {
    let f = fixture();
    let bare = Arc::new(ServiceState { tables: f.state.tables.clone(), ..Default::default() });
    let (status, body) = call_json(bare.clone(), "POST", "/advise", Some(advise_body(Some(2.8), 1))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(body["error"].as_str().unwrap().contains("missing model artifact"));

    let req = json!({"dataset": "synthetic", "policy": {"kind": "early_educated"}, "profile": profile(None)});
    let (status, _) = call_json(bare, "POST", "/evaluate", Some(req)).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    let (status, _) = call_json(Arc::new(ServiceState::default()), "POST", "/advise", Some(advise_body(None, 1))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn evaluate_matches_the_library() {
    let f = fixture();
    let tables = f.state.tables.as_ref().unwrap();
    let gk: penaltysim::GoalkeeperProfile = serde_json::from_value(profile(Some(2.8))).unwrap();
    let fvs = extract_all(&f.records, None).unwrap();
    let models = Models { direction: f.state.direction.as_ref(), distance: f.state.distance.as_ref() };
    let set = SimulationSet::build(&f.records, &fvs, models).unwrap();
    for kind in [PolicyKind::Late, PolicyKind::MixedEducated] {
        let want = evaluate_policy(&set, &PolicySpec::new(kind), &gk, &UncertaintyParams::default(), tables, GtMode::Expectation).unwrap();
        let req = json!({"dataset": "synthetic", "policy": {"kind": kind}, "profile": profile(Some(2.8))});
        let (status, body) = call_json(f.state.clone(), "POST", "/evaluate", Some(req)).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        assert_eq!(body["aggregate"].as_f64().unwrap(), want.aggregate);
        assert_eq!(body["kicks"].as_array().unwrap().len(), want.kicks.len());
        assert_eq!(body["kicks"][0]["kick_id"], want.kicks[0].kick_id);
    }

    let inline: Vec<&PenaltyRecord> = f.records.iter().take(200).collect();
    let req = json!({"records": inline, "policy": {"kind": "early"}, "profile": profile(None), "include_kicks": false, "situation": "in_game"});
    let (status, body) = call_json(f.state.clone(), "POST", "/evaluate", Some(req)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert!(body.get("kicks").is_none());
    assert!(body["n_kicks"].as_u64().unwrap() > 100);
}

#[tokio::test]
async fn evaluate_rejects_bad_references() {
    let f = fixture();
    let base = |dataset: &str| json!({"dataset": dataset, "policy": {"kind": "early"}, "profile": profile(None)});
    let (status, body) = call_json(f.state.clone(), "POST", "/evaluate", Some(base("../etc/passwd"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "dataset");
    let (status, _) = call_json(f.state.clone(), "POST", "/evaluate", Some(base("elsewhere"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let req = json!({"dataset": "synthetic", "policy": {"kind": "late"}, "profile": profile(None)});
    let (status, body) = call_json(f.state.clone(), "POST", "/evaluate", Some(req)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "profile.late_range");

    let req = json!({"dataset": "synthetic", "policy": {"kind": "game_theoretic"}, "profile": profile(Some(2.8))});
    let (status, body) = call_json(f.state.clone(), "POST", "/evaluate", Some(req)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "policy");

    let req = json!({"policy": {"kind": "early"}, "profile": profile(None)});
    let (status, _) = call_json(f.state.clone(), "POST", "/evaluate", Some(req)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn policies_follow_capacities() {
    let state = Arc::new(ServiceState::default());
    let names = |v: &Value| -> Vec<String> { v["policies"].as_array().unwrap().iter().map(|p| p.as_str().unwrap().to_string()).collect() };
    let (_, body) = call_json(state.clone(), "GET", "/policies", None).await;
    assert_eq!(names(&body), ["early", "early_educated"]);
    let (_, body) = call_json(state.clone(), "GET", "/policies?late_range=2.8&gt_mix=0.1,0.8,0.1", None).await;
    assert_eq!(names(&body), ["late", "early", "early_educated", "mixed_educated", "game_theoretic"]);
    let (_, body) = call_json(state.clone(), "GET", "/policies?gt_mix=0.5,0,0.5", None).await;
    assert_eq!(names(&body), ["early", "early_educated", "game_theoretic"]);
    let (status, body) = call_json(state.clone(), "GET", "/policies?late_range=far", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(field(&body), "late_range");
}
