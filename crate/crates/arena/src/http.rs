use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use sheetarena_rating::Outcome;

use crate::service::{Arena, LeaderboardQuery};
use crate::ArenaError;

pub const VOTER_HEADER: &str = "x-voter-token";

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<ArenaError> for ApiError {
    fn from(e: ArenaError) -> Self {
        let status = match &e {
            ArenaError::EmptyPrompt
            | ArenaError::PromptTooLong(_)
            | ArenaError::MissingVoterToken
            | ArenaError::Categorizer(_) => StatusCode::BAD_REQUEST,
            ArenaError::UnknownBattle(_) => StatusCode::NOT_FOUND,
            ArenaError::DuplicateVote(_) => StatusCode::CONFLICT,
            ArenaError::Match(_) => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %e, "request failed");
        }
        Self {
            status,
            message: e.to_string(),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
pub struct PromptBody {
    #[serde(alias = "prompt")]
    pub text: String,
}

#[derive(Debug, Deserialize)]
pub struct VoteBody {
    pub outcome: Outcome,
    #[serde(default)]
    pub voter_token: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct BoardParams {
    pub category: Option<String>,
    #[serde(default)]
    pub adjusted: bool,
    pub min_votes: Option<usize>,
}

async fn blocking<T, F>(arena: Arc<Arena>, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&Arena) -> Result<T, ArenaError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&arena))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: e.to_string(),
        })?
        .map_err(ApiError::from)
}

async fn submit(
    State(arena): State<Arc<Arena>>,
    body: Result<Json<PromptBody>, JsonRejection>,
) -> ApiResult<crate::service::SubmitResponse> {
    let Json(body) = body?;
    blocking(arena, move |a| a.submit_prompt(&body.text)).await.map(Json)
}

async fn battle(State(arena): State<Arc<Arena>>, Path(id): Path<String>) -> ApiResult<crate::service::BattleView> {
    blocking(arena, move |a| a.get_battle(&id)).await.map(Json)
}

async fn vote(
    State(arena): State<Arc<Arena>>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<VoteBody>, JsonRejection>,
) -> ApiResult<crate::service::VoteAck> {
    let Json(body) = body?;
    let token = body
        .voter_token
        .or_else(|| headers.get(VOTER_HEADER).and_then(|h| h.to_str().ok()).map(str::to_string))
        .unwrap_or_default();
    blocking(arena, move |a| a.cast_vote(&id, body.outcome, &token)).await.map(Json)
}

async fn leaderboard(
    State(arena): State<Arc<Arena>>,
    params: Result<Query<BoardParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(p) = params?;
    let query = LeaderboardQuery {
        category: p.category.filter(|c| !c.is_empty()),
        adjusted: p.adjusted,
        min_votes: p.min_votes,
    };
    let board = blocking(arena, move |a| Ok(a.leaderboard(&query))).await?;
    Ok(Json(&*board).into_response())
}

async fn models(State(arena): State<Arc<Arena>>) -> Response {
    Json(arena.models()).into_response()
}

pub fn router(arena: Arc<Arena>) -> Router {
    Router::new()
        .route("/prompts", post(submit))
        .route("/battles/{id}", get(battle))
        .route("/battles/{id}/vote", post(vote))
        .route("/leaderboard", get(leaderboard))
        .route("/models", get(models))
        .with_state(arena)
}

/// Serve until `shutdown` resolves; in-flight requests finish first.
pub async fn serve(
    arena: Arc<Arena>,
    listener: tokio::net::TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), "arena listening");
    axum::serve(listener, router(arena)).with_graceful_shutdown(shutdown).await
}
