//! Local HTTP service for live transliteration.
//!
//! `POST /v1/transliterate` runs the pipeline on a sentence; `GET /v1/health`
//! reports which resources are loaded. Both answer 503 until the pipeline
//! has finished loading.

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use log::{error, info};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use xlit_core::pipeline::{PipelineError, SlotResult};
use xlit_core::{Pipeline, TransliterateOptions};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(2000);
pub const DEFAULT_MAX_BODY_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub pipeline_config: Option<PathBuf>,
    pub request_timeout: Duration,
    pub max_body_bytes: usize,
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.addr.port() == 0 {
            return Err("port must be in 1..=65535".into());
        }
        if self.request_timeout.is_zero() {
            return Err("request timeout must be positive".into());
        }
        Ok(())
    }
}

/// Shared handler state. The pipeline slot is filled once loading is done.
#[derive(Clone)]
pub struct AppState {
    pipeline: Arc<OnceLock<Arc<Pipeline>>>,
    request_timeout: Duration,
}

impl AppState {
    pub fn new(request_timeout: Duration) -> Self {
        AppState {
            pipeline: Arc::new(OnceLock::new()),
            request_timeout,
        }
    }

    pub fn ready(pipeline: Pipeline, request_timeout: Duration) -> Self {
        let state = Self::new(request_timeout);
        state.install(pipeline);
        state
    }

    /// Publishes the loaded pipeline; later calls are ignored.
    pub fn install(&self, pipeline: Pipeline) {
        let _ = self.pipeline.set(Arc::new(pipeline));
    }

    fn pipeline(&self) -> Option<Arc<Pipeline>> {
        self.pipeline.get().cloned()
    }
}

#[derive(Debug, Deserialize)]
pub struct TransliterateRequest {
    pub text: String,
    #[serde(default)]
    pub top_k: Option<usize>,
    #[serde(default)]
    pub prefix_mode: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TransliterateResponse {
    pub output: String,
    pub slots: Vec<SlotResult>,
    pub latency_ms: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Resources {
    pub rules: bool,
    pub lexicon: bool,
    pub lm: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Health {
    pub status: String,
    pub resources: Resources,
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn not_ready() -> Response {
    error_response(StatusCode::SERVICE_UNAVAILABLE, "resources are still loading")
}

async fn health(State(state): State<AppState>) -> Response {
    match state.pipeline() {
        None => not_ready(),
        Some(p) => Json(Health {
            status: "ok".into(),
            resources: Resources {
                rules: p.has_rules(),
                lexicon: p.has_lexicon(),
                lm: p.has_lm(),
            },
        })
        .into_response(),
    }
}

async fn transliterate(State(state): State<AppState>, body: Bytes) -> Response {
    let Some(pipeline) = state.pipeline() else {
        return not_ready();
    };
    let request: TransliterateRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("invalid request: {e}")),
    };
    if request.top_k == Some(0) {
        return error_response(StatusCode::BAD_REQUEST, "top_k must be at least 1");
    }
    let options = TransliterateOptions {
        prefix_mode: request.prefix_mode.unwrap_or(false),
        top_k: request.top_k,
    };
    // The pipeline may block on an external scorer.
    let work = tokio::task::spawn_blocking(move || pipeline.transliterate(&request.text, options));
    match tokio::time::timeout(state.request_timeout, work).await {
        Err(_) => error_response(StatusCode::GATEWAY_TIMEOUT, "transliteration timed out"),
        Ok(Err(join)) => {
            error!("transliteration task failed: {join}");
            error_response(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
        Ok(Ok(Err(e @ PipelineError::Disambiguation(_)))) => {
            error_response(StatusCode::SERVICE_UNAVAILABLE, e.to_string())
        }
        Ok(Ok(Err(e))) => error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Ok(Ok(Ok(result))) => Json(TransliterateResponse {
            output: result.output,
            slots: result.slots,
            latency_ms: result.latency_ms,
        })
        .into_response(),
    }
}

pub fn router(state: AppState, max_body_bytes: usize) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/transliterate", post(transliterate))
        .layer(DefaultBodyLimit::max(max_body_bytes))
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve<F>(
    listener: TcpListener,
    state: AppState,
    max_body_bytes: usize,
    shutdown: F,
) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, max_body_bytes))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Binds first, then loads the pipeline in the background so health checks
/// answer (with 503) while large resources are still being read.
pub async fn run(
    config: ServiceConfig,
    load: impl FnOnce() -> Result<Pipeline, PipelineError> + Send + 'static,
) -> anyhow::Result<()> {
    config.validate().map_err(anyhow::Error::msg)?;
    if let Some(path) = &config.pipeline_config {
        info!("pipeline config: {}", path.display());
    }
    let listener = TcpListener::bind(config.addr).await?;
    let state = AppState::new(config.request_timeout);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || match load() {
        Ok(pipeline) => {
            info!(
                "resources loaded (rules: {}, lexicon: {}, lm: {})",
                pipeline.has_rules(),
                pipeline.has_lexicon(),
                pipeline.has_lm()
            );
            loader.install(pipeline);
        }
        Err(e) => {
            error!("failed to load resources: {e}");
            std::process::exit(2);
        }
    });
    serve(listener, state, config.max_body_bytes, async {
        let _ = tokio::signal::ctrl_c().await;
        info!("shutting down");
    })
    .await?;
    Ok(())
}
