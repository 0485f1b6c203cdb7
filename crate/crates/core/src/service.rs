//! HTTP facade over a [`TriageStore`].
//!
//! | method | path                         | result                              |
//! |--------|------------------------------|-------------------------------------|
//! | GET    | `/api/queue/next`            | next [`ReviewItem`] or 204          |
//! | GET    | `/api/items/{id}`            | one [`ReviewItem`]                  |
//! | POST   | `/api/items/{id}/judgment`   | updated [`ReviewItem`]              |
//! | GET    | `/api/progress`              | [`Progress`](crate::triage::Progress) |
//! | GET    | `/api/report`                | canonical [`FinalReport`](crate::triage::FinalReport) JSON |
//!
//! Item ids are `system:pronoun`. Every error response carries one
//! `{"error": {"code", "message"}}` body. Judgments are applied one at a
//! time under a lock, so the journal has a single writer.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::corpus::{DisagreementLabel, Verdict};
use crate::triage::{CategoryFilter, ItemId, Judgment, QueueFilter, ReviewItem, TriageError, TriageStore};

pub const DEFAULT_ADDR: &str = "127.0.0.1:7878";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiErrorCode {
    NotFound,
    Conflict,
    Validation,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ApiErrorCode,
    pub message: String,
}

#[derive(Serialize, Deserialize)]
pub struct ApiErrorBody {
    pub error: ApiError,
}

impl ApiError {
    pub fn new(code: ApiErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self.code {
            ApiErrorCode::NotFound => StatusCode::NOT_FOUND,
            ApiErrorCode::Conflict => StatusCode::CONFLICT,
            ApiErrorCode::Validation => StatusCode::UNPROCESSABLE_ENTITY,
            ApiErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<TriageError> for ApiError {
    fn from(e: TriageError) -> Self {
        let code = match &e {
            TriageError::UnknownItem(_) => ApiErrorCode::NotFound,
            TriageError::Conflict { .. } => ApiErrorCode::Conflict,
            TriageError::Validation(_) => ApiErrorCode::Validation,
            TriageError::MissingContext(_) | TriageError::Corrupt { .. } | TriageError::Io(_) => ApiErrorCode::Internal,
        };
        ApiError::new(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(ApiErrorBody { error: self })).into_response()
    }
}

/// Judgment as posted by a client; the item comes from the path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentRequest {
    pub annotator: String,
    pub pronoun_verdict: Verdict,
    #[serde(default)]
    pub antecedent_verdict: Option<Verdict>,
    #[serde(default)]
    pub disagreement_label: Option<DisagreementLabel>,
    pub revision: u64,
    #[serde(default)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
pub struct NextQuery {
    pub annotator: Option<String>,
    pub category: Option<String>,
    pub system: Option<String>,
}

pub type SharedStore = Arc<Mutex<TriageStore>>;

fn lock(store: &SharedStore) -> Result<MutexGuard<'_, TriageStore>, ApiError> {
    store
        .lock()
        .map_err(|_| ApiError::new(ApiErrorCode::Internal, "triage state lock poisoned"))
}

fn parse_item_id(raw: &str) -> Result<ItemId, ApiError> {
    raw.parse::<ItemId>()
        .map_err(|e| ApiError::new(ApiErrorCode::NotFound, e.to_string()))
}

async fn next_item(
    State(store): State<SharedStore>,
    query: Result<Query<NextQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(q) = query.map_err(|e| ApiError::new(ApiErrorCode::Validation, e.body_text()))?;
    let category = q
        .category
        .filter(|c| !c.is_empty())
        .map(|c| c.parse::<CategoryFilter>())
        .transpose()?;
    let filter = QueueFilter {
        annotator: q.annotator.filter(|a| !a.is_empty()),
        category,
        system: q.system.filter(|s| !s.is_empty()),
    };
    let store = lock(&store)?;
    Ok(match store.queue().next_item(&filter) {
        Some(item) => Json(item.clone()).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

async fn get_item(State(store): State<SharedStore>, Path(id): Path<String>) -> Result<Json<ReviewItem>, ApiError> {
    let id = parse_item_id(&id)?;
    let store = lock(&store)?;
    store
        .queue()
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(ApiErrorCode::NotFound, format!("unknown item {id}")))
}

async fn post_judgment(
    State(store): State<SharedStore>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ReviewItem>, ApiError> {
    let id = parse_item_id(&id)?;
    let req: JudgmentRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(ApiErrorCode::Validation, format!("invalid judgment: {e}")))?;
    let judgment = Judgment {
        item_id: id,
        annotator: req.annotator,
        pronoun_verdict: req.pronoun_verdict,
        antecedent_verdict: req.antecedent_verdict,
        disagreement_label: req.disagreement_label,
        revision: req.revision,
        timestamp: req.timestamp.or_else(|| Some(chrono::Utc::now().to_rfc3339())),
    };
    let mut store = lock(&store)?;
    let item = store.submit(judgment)?;
    log::info!("judged {} (revision {})", item.item_id, item.revision);
    Ok(Json(item))
}

async fn progress(State(store): State<SharedStore>) -> Result<Response, ApiError> {
    let store = lock(&store)?;
    Ok(Json(store.queue().progress()).into_response())
}

async fn report(State(store): State<SharedStore>) -> Result<Response, ApiError> {
    let body = lock(&store)?.report().to_canonical_json();
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn api_not_found() -> ApiError {
    ApiError::new(ApiErrorCode::NotFound, "no such endpoint")
}

/// Routes for the API, plus the UI bundle at `/` when a directory is given.
pub fn router(store: SharedStore, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/queue/next", get(next_item))
        .route("/items/{id}", get(get_item))
        .route("/items/{id}/judgment", post(post_judgment))
        .route("/progress", get(progress))
        .route("/report", get(report))
        .fallback(api_not_found)
        .with_state(store);
    let app = Router::new().nest("/api", api);
    match ui_dir {
        Some(dir) if dir.is_dir() => app.fallback_service(ServeDir::new(dir)),
        _ => app,
    }
}

/// Serves until Ctrl-C.
pub async fn serve(store: TriageStore, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let app = router(Arc::new(Mutex::new(store)), ui_dir);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
