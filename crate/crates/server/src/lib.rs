//! HTTP facade for the certifying authority.
//!
//! Routes:
//!
//! - `POST /records` `{author, text, keyword?, min_count?}` registers a
//!   document. The watermark is always regenerated here from the submitted
//!   text; clients cannot supply one. Responds 201 with the stored record.
//! - `POST /verify` `{text, record_id}` or `{text, keyword, watermark}`,
//!   optional `mode`. Responds 200 with the verdict.
//! - `GET /records?author=&keyword=&digest=&id=` lists matching records.
//! - `GET /health`.
//!
//! Errors are JSON `{error, message}`: 422 for keyword problems, 404 for an
//! unknown record, 500 for storage failures.

use std::future::Future;
use std::sync::Arc;

use axum::extract::{Query as QueryParams, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tokio::net::TcpListener;

use zwm_core::api::{self, ErrorBody, RegisterRequest, VerifyRequest};
use zwm_core::{Clock, Error, Query, Registry, SystemClock, VerificationResult, WatermarkRecord};

#[derive(Clone)]
pub struct AppState {
    registry: Arc<Registry>,
    clock: Arc<dyn Clock>,
}

impl AppState {
    pub fn new(registry: Arc<Registry>) -> Self {
        Self::with_clock(registry, Arc::new(SystemClock))
    }

    pub fn with_clock(registry: Arc<Registry>, clock: Arc<dyn Clock>) -> Self {
        AppState { registry, clock }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/records", post(register).get(list_records))
        .route("/verify", post(verify))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(listener: TcpListener, state: AppState, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), registry = %state.registry.path().display(), "certifying authority listening");
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownRecord { .. } => StatusCode::NOT_FOUND,
            e if e.is_keyword_error() => StatusCode::UNPROCESSABLE_ENTITY,
            Error::StorageFailure(_) | Error::Io { .. } | Error::CorruptRecord { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(ErrorBody::from(&self.0))).into_response()
    }
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "records": state.registry.len() }))
}

async fn register(State(state): State<AppState>, Json(req): Json<RegisterRequest>) -> Result<(StatusCode, Json<WatermarkRecord>), ApiError> {
    // Appends fsync; keep them off the async workers.
    let record = tokio::task::spawn_blocking(move || state.registry.register(&req.text, &req.author, &req.policy(), state.clock.as_ref()))
        .await
        .map_err(|e| Error::StorageFailure(std::io::Error::other(e)))??;
    tracing::info!(id = %record.id, author = %record.author, keyword = %record.keyword, "registered");
    Ok((StatusCode::CREATED, Json(record)))
}

async fn list_records(State(state): State<AppState>, QueryParams(query): QueryParams<Query>) -> Json<Vec<WatermarkRecord>> {
    Json(state.registry.find(&query))
}

async fn verify(State(state): State<AppState>, Json(req): Json<VerifyRequest>) -> Result<Json<VerificationResult>, ApiError> {
    Ok(Json(api::verify(req, Some(&state.registry))?))
}
