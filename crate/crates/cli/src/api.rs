//! Request and response bodies of the HTTP service and the synchronous
//! work behind each endpoint.

use std::path::PathBuf;

use penaltysim::features::{schema, schema_hash, FeatureVector, KickContext, SchemaEntry};
use penaltysim::gametheory::{solve_minimax, MixedStrategy, PayoffMatrix, DEFAULT_PAYOFFS};
use penaltysim::models::BoostedModel;
use penaltysim::simulator::{
    advise, available_policies, evaluate_policy, Advice, AdviceOptions, EmpiricalTables, GtMode, KickEvaluation, Models,
};
use penaltysim::{Error, GoalkeeperProfile, PenaltyRecord, PolicyKind, PolicySpec, UncertaintyParams};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::pipeline::{build_set, load_dataset, Situation};

pub const SCHEMA_VERSION: &str = "1";

/// Artifacts loaded once at startup and shared read-only by all requests.
#[derive(Debug, Default)]
pub struct ServiceState {
    pub direction: Option<BoostedModel>,
    pub distance: Option<BoostedModel>,
    pub tables: Option<EmpiricalTables>,
    pub records_dir: Option<PathBuf>,
}

impl ServiceState {
    fn models(&self) -> Models<'_> {
        Models { direction: self.direction.as_ref(), distance: self.distance.as_ref() }
    }

    fn tables(&self) -> Result<&EmpiricalTables, ApiError> {
        self.tables.as_ref().ok_or_else(|| ApiError::unavailable("missing artifact: empirical tables"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default)]
    pub fields: Vec<FieldError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn bad_request(field: impl Into<String>, message: impl Into<String>) -> Self {
        let message = message.into();
        ApiError {
            status: 400,
            body: ErrorBody { error: "invalid request".into(), fields: vec![FieldError { field: field.into(), message }] },
        }
    }

    pub fn unavailable(message: impl Into<String>) -> Self {
        ApiError { status: 503, body: ErrorBody { error: message.into(), fields: Vec::new() } }
    }

    fn not_found(field: &str, message: impl Into<String>) -> Self {
        ApiError { status: 404, ..Self::bad_request(field, message) }
    }

    /// Maps a core error raised while handling the part of the request
    /// found at `scope`.
    pub fn from_core(e: Error, scope: &str) -> Self {
        match e {
            Error::MissingModel(_) => Self::unavailable(e.to_string()),
            Error::InvalidInput(msg) => Self::bad_request(field_of(scope, &msg), msg),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => {
                ApiError { status: 500, body: ErrorBody { error: e.to_string(), fields: Vec::new() } }
            }
            other => Self::bad_request(scope, other.to_string()),
        }
    }
}

/// Core messages start with the offending field name when there is one.
fn field_of(scope: &str, msg: &str) -> String {
    let head: String = msg.chars().take_while(|c| c.is_ascii_lowercase() || *c == '_').collect();
    let rest = &msg[head.len()..];
    let named = head.contains('_') || matches!(head.as_str(), "mu" | "rho" | "offset");
    if !head.is_empty() && named && (rest.starts_with(':') || rest.starts_with(" must")) {
        if scope.is_empty() { head } else { format!("{scope}.{head}") }
    } else {
        scope.to_string()
    }
}

/// Deserializes a JSON body, reporting the path of the first bad field.
pub fn parse_body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        ApiError::bad_request(field, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| ApiError::bad_request("", e.to_string()))?;
    Ok(value)
}

// ------------------------------------------------------------------ health

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub schema_version: String,
    pub direction_model: bool,
    pub distance_model: bool,
    pub tables: bool,
}

pub fn health(state: &ServiceState) -> Health {
    Health {
        status: "ok".into(),
        schema_version: SCHEMA_VERSION.into(),
        direction_model: state.direction.is_some(),
        distance_model: state.distance.is_some(),
        tables: state.tables.is_some(),
    }
}

// -------------------------------------------------------------- solve-game

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveGameRequest {
    /// Scoring probabilities, kicker actions as rows.
    pub payoff: Vec<Vec<f64>>,
    #[serde(default)]
    pub row_labels: Option<Vec<String>>,
    #[serde(default)]
    pub col_labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveGameResponse {
    pub kicker: MixedStrategy,
    pub keeper: MixedStrategy,
    pub value: f64,
    /// (natural early, late, nonnatural early), ready for `gt_mix`. Only
    /// present for the standard keeper actions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keeper_policy_mix: Option<[f64; 3]>,
}

pub fn solve_game(req: SolveGameRequest) -> Result<SolveGameResponse, ApiError> {
    let mut matrix = PayoffMatrix::from_values(&req.payoff).map_err(|e| ApiError::from_core(e, "payoff"))?;
    if let Some(labels) = req.row_labels {
        if labels.len() != matrix.n_rows() {
            return Err(ApiError::bad_request("row_labels", format!("expected {} labels", matrix.n_rows())));
        }
        matrix.row_labels = labels;
    }
    if let Some(labels) = req.col_labels {
        if labels.len() != matrix.n_cols() {
            return Err(ApiError::bad_request("col_labels", format!("expected {} labels", matrix.n_cols())));
        }
        matrix.col_labels = labels;
    }
    let eq = solve_minimax(&matrix).map_err(|e| ApiError::from_core(e, "payoff"))?;
    Ok(SolveGameResponse { keeper_policy_mix: eq.keeper_policy_mix().ok(), kicker: eq.kicker, keeper: eq.keeper, value: eq.value })
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    /// Name of a record file in the service's records directory.
    #[serde(default)]
    pub dataset: Option<String>,
    /// Inline records; exclusive with `dataset`.
    #[serde(default)]
    pub records: Option<Vec<PenaltyRecord>>,
    pub policy: PolicySpec,
    pub profile: GoalkeeperProfile,
    #[serde(default)]
    pub params: UncertaintyParams,
    #[serde(default)]
    pub situation: Situation,
    /// Draw game-theoretic actions per kick with this seed instead of
    /// taking the expectation.
    #[serde(default)]
    pub gt_seed: Option<u64>,
    #[serde(default = "yes")]
    pub include_kicks: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateResponse {
    pub policy: PolicySpec,
    pub n_kicks: usize,
    pub aggregate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kicks: Vec<KickEvaluation>,
}

pub fn evaluate(state: &ServiceState, req: EvaluateRequest) -> Result<EvaluateResponse, ApiError> {
    req.policy.validate().map_err(|e| ApiError::from_core(e, "policy"))?;
    req.profile.validate().map_err(|e| ApiError::from_core(e, "profile"))?;
    req.params.validate().map_err(|e| ApiError::from_core(e, "params"))?;
    if req.policy.kind.uses_late_dive() && req.profile.late_range.is_none() && req.policy.kind != PolicyKind::GameTheoretic {
        return Err(ApiError::bad_request("profile.late_range", format!("required by the {} policy", req.policy.kind)));
    }
    let records = match (req.dataset, req.records) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("dataset", "give either dataset or records, not both")),
        (None, None) => return Err(ApiError::bad_request("records", "a dataset name or inline records are required")),
        (None, Some(r)) => r,
        (Some(name), None) => {
            let dir = state
                .records_dir
                .as_ref()
                .ok_or_else(|| ApiError::unavailable("missing artifact: no records directory configured"))?;
            load_dataset(dir, &name).map_err(|e| match e {
                Error::InvalidInput(msg) if msg.contains("unknown dataset") => ApiError::not_found("dataset", msg),
                other => ApiError::from_core(other, "dataset"),
            })?
        }
    };
    for (i, r) in records.iter().enumerate() {
        r.validate().map_err(|e| ApiError::from_core(e, &format!("records[{i}]")))?;
    }
    let tables = state.tables()?;
    let features = penaltysim::features::extract_all(&records, None).map_err(|e| ApiError::from_core(e, "records"))?;
    let models = Models {
        direction: if req.policy.kind.needs_direction_model() { state.direction.as_ref() } else { None },
        distance: if req.policy.kind.needs_distance_model() { state.distance.as_ref() } else { None },
    };
    if req.policy.kind.needs_direction_model() && models.direction.is_none() {
        return Err(ApiError::unavailable("missing model artifact: direction model"));
    }
    if req.policy.kind.needs_distance_model() && models.distance.is_none() {
        return Err(ApiError::unavailable("missing model artifact: distance model"));
    }
    let set = build_set(&records, &features, models, req.situation).map_err(|e| ApiError::from_core(e, "records"))?;
    if set.is_empty() {
        return Err(ApiError::bad_request("records", "no on-target kicks to evaluate"));
    }
    let mode = req.gt_seed.map_or(GtMode::Expectation, GtMode::Sampled);
    let eval = evaluate_policy(&set, &req.policy, &req.profile, &req.params, tables, mode).map_err(|e| ApiError::from_core(e, "policy"))?;
    Ok(EvaluateResponse {
        policy: req.policy,
        n_kicks: eval.kicks.len(),
        aggregate: eval.aggregate,
        kicks: if req.include_kicks { eval.kicks } else { Vec::new() },
    })
}

// ------------------------------------------------------------------ advise

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdviseRequest {
    /// Raw context and taker statistics; features are computed server-side.
    #[serde(default)]
    pub context: Option<KickContext>,
    /// A full feature vector; exclusive with `context`.
    #[serde(default)]
    pub features: Option<FeatureVector>,
    pub profile: GoalkeeperProfile,
    #[serde(default)]
    pub params: UncertaintyParams,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub early_direction_mix: Option<[f64; 2]>,
    #[serde(default)]
    pub gt_mix: Option<[f64; 3]>,
    pub seed: u64,
}

pub fn advise_request(state: &ServiceState, req: AdviseRequest) -> Result<Advice, ApiError> {
    let features = match (req.context, req.features) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("context", "give either context or features, not both")),
        (None, None) => return Err(ApiError::bad_request("context", "context or features are required")),
        (Some(ctx), None) => ctx.to_features().map_err(|e| ApiError::from_core(e, "context"))?,
        (None, Some(fv)) => fv,
    };
    req.profile.validate().map_err(|e| ApiError::from_core(e, "profile"))?;
    req.params.validate().map_err(|e| ApiError::from_core(e, "params"))?;
    let options = AdviceOptions { offset: req.offset, early_direction_mix: req.early_direction_mix, gt_mix: req.gt_mix };
    PolicySpec { kind: PolicyKind::Early, offset: options.offset, early_direction_mix: options.early_direction_mix, gt_mix: options.gt_mix }
        .validate()
        .map_err(|e| ApiError::from_core(e, ""))?;
    let tables = state.tables()?;
    advise(&features, &req.profile, &req.params, tables, state.models(), &options, req.seed).map_err(|e| ApiError::from_core(e, ""))
}

// ---------------------------------------------------------------- policies

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoliciesResponse {
    pub policies: Vec<PolicyKind>,
}

/// Query keys: `late_range` (absent means the keeper cannot dive late) and
/// `gt_mix` as three comma-separated numbers.
pub fn policies(query: &[(String, String)]) -> Result<PoliciesResponse, ApiError> {
    let mut late = None;
    let mut gt_mix = None;
    for (key, value) in query {
        match key.as_str() {
            "late_range" => {
                let v: f64 = value.parse().map_err(|_| ApiError::bad_request("late_range", "expected a number"))?;
                if !(v > 0.0) {
                    return Err(ApiError::bad_request("late_range", "must be > 0"));
                }
                late = Some(v);
            }
            "gt_mix" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| ApiError::bad_request("gt_mix", "expected three comma-separated numbers"))?;
                let mix: [f64; 3] = parts.try_into().map_err(|_| ApiError::bad_request("gt_mix", "expected three numbers"))?;
                PolicySpec::new(PolicyKind::GameTheoretic).with_gt_mix(mix).validate().map_err(|e| ApiError::bad_request("gt_mix", e.to_string()))?;
                gt_mix = Some(mix);
            }
            other => return Err(ApiError::bad_request(other, "unknown query parameter")),
        }
    }
    // Availability depends only on whether a late dive exists.
    let gk = GoalkeeperProfile {
        early_range: late.unwrap_or(1.0),
        late_range: late,
        p_late_correct_independent: 0.5,
        p_late_correct_dependent: 0.5,
        p_early_correct_dependent: 0.05,
        start_offset: 0.0,
    };
    Ok(PoliciesResponse { policies: available_policies(&gk, gt_mix) })
}

// ------------------------------------------------------------------ schema

#[derive(Debug, Clone, Serialize)]
pub struct EndpointDoc {
    pub method: &'static str,
    pub path: &'static str,
    pub description: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example_request: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemaDoc {
    pub version: &'static str,
    pub feature_schema_hash: String,
    pub features: Vec<SchemaEntry>,
    pub policies: Vec<PolicyKind>,
    pub endpoints: Vec<EndpointDoc>,
}

pub fn schema_doc() -> SchemaDoc {
    let profile = json!({
        "early_range": 3.1, "late_range": 2.8,
        "p_late_correct_independent": 0.59, "p_late_correct_dependent": 0.59,
        "p_early_correct_dependent": 0.05, "start_offset": 0.0
    });
    let doc = |method, path, description, example: Option<Value>| EndpointDoc { method, path, description, example_request: example };
    SchemaDoc {
        version: SCHEMA_VERSION,
        feature_schema_hash: schema_hash(),
        features: schema(),
        policies: PolicyKind::ALL.to_vec(),
        endpoints: vec![
            doc("GET", "/health", "Liveness and loaded artifacts.", None),
            doc("GET", "/schema", "This document.", None),
            doc(
                "GET",
                "/policies",
                "Policies available to a keeper. Query: late_range (optional), gt_mix=a,b,c (optional).",
                None,
            ),
            doc(
                "POST",
                "/solve-game",
                "Minimax mixes and value of a payoff matrix (rows: kicker actions N, C, NN, Dep; columns: keeper GK N, GK Late, GK NN).",
                Some(json!({ "payoff": DEFAULT_PAYOFFS })),
            ),
            doc(
                "POST",
                "/evaluate",
                "Aggregate and per-kick save probability of one policy over a dataset or inline records.",
                Some(json!({"dataset": "synthetic", "policy": {"kind": "late"}, "profile": profile, "params": {"mu": 0.7, "rho": 0.7}, "situation": "in_game"})),
            ),
            doc(
                "POST",
                "/advise",
                "Per-policy save probability for one kick, the recommended policy and an instruction sampled with the given seed.",
                Some(json!({"context": {"minute": 80, "foot": "right", "pens_taken": 12, "pct_to_natural": 60.0}, "profile": profile, "seed": 7})),
            ),
        ],
    }
}
