//! HTTP routes over [`crate::api`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::api::{self, ApiError, ServiceState};

type Shared = State<Arc<ServiceState>>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body)).into_response()
    }
}

fn reply<T: Serialize>(result: Result<T, ApiError>) -> Response {
    match result {
        Ok(body) => Json(body).into_response(),
        Err(e) => e.into_response(),
    }
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/schema", get(schema))
        .route("/policies", get(policies))
        .route("/solve-game", post(solve_game))
        .route("/evaluate", post(evaluate))
        .route("/advise", post(advise))
        .with_state(state)
}

async fn health(State(state): Shared) -> Response {
    Json(api::health(&state)).into_response()
}

async fn schema() -> Response {
    Json(api::schema_doc()).into_response()
}

async fn policies(Query(pairs): Query<Vec<(String, String)>>) -> Response {
    reply(api::policies(&pairs))
}

async fn solve_game(body: Bytes) -> Response {
    reply(api::parse_body(&body).and_then(api::solve_game))
}

async fn evaluate(State(state): Shared, body: Bytes) -> Response {
    let req = match api::parse_body(&body) {
        Ok(req) => req,
        Err(e) => return e.into_response(),
    };
    let result = tokio::task::spawn_blocking(move || api::evaluate(&state, req)).await;
    match result {
        Ok(r) => reply(r),
        Err(e) => ApiError::unavailable(format!("evaluation task failed: {e}")).into_response(),
    }
}

async fn advise(State(state): Shared, body: Bytes) -> Response {
    reply(api::parse_body(&body).and_then(|req| api::advise_request(&state, req)))
}
