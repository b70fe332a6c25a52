//! HTTP/JSON survey service.
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | POST | `/sessions` | `{"seed"?: u64, "order"?: "shape_first" \| "texture_first"}` | `{"session_id", "n_tasks"}` |
//! | GET | `/sessions/{id}/familiarization?section=shape` | | `{"section", "images": {superclass: [url; 3]}}` |
//! | GET | `/sessions/{id}/next` | | `{"cursor", "total", "completed", "task"?, "image_url"?, "noise_url"?, "noise_duration_ms"?}` |
//! | POST | `/sessions/{id}/responses` | `{"index", "choice", "response_time_ms"}` | `{"session_id", "index", "cursor", "completed"}` |
//! | GET | `/noise/{seed}` | | 256×256 grayscale PNG |
//! | GET | `/export` | `Authorization: Bearer <token>` | array of rating matrices |
//! | GET | `/stimuli/{path}` | | file under the stimulus root |
//!
//! Errors are `{"error": message}` with 400 (bad request), 401 (token),
//! 404 (unknown session, no data), 409 (duplicate, out of order, section
//! already started, session complete) or 422 (choice not a candidate).

use std::path::{Component, Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use refined_bias_core::metrics::Cue;
use refined_bias_core::survey::{
    export_responses, familiarization_set, generate_pink_noise, SectionOrder, SessionConfig, SurveyError, SurveyStore,
    Task,
};
use refined_bias_core::StimulusManifest;
use serde::{Deserialize, Serialize};

pub const NOISE_SIZE: usize = 256;

pub struct ServerConfig {
    pub manifest: StimulusManifest,
    pub store: SurveyStore,
    pub session_defaults: SessionConfig,
    pub stimuli_root: PathBuf,
    /// Bearer token for `/export`; export is disabled when `None`.
    pub export_token: Option<String>,
    /// Seed for export down-sampling.
    pub export_seed: u64,
    /// How long the client shows a pink-noise interstitial.
    pub noise_duration_ms: u64,
}

type AppState = Arc<ServerConfig>;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<SurveyError> for ApiError {
    fn from(e: SurveyError) -> Self {
        let status = match &e {
            SurveyError::UnknownSession(_) | SurveyError::NoData => StatusCode::NOT_FOUND,
            SurveyError::Duplicate(_)
            | SurveyError::OutOfOrder { .. }
            | SurveyError::SectionStarted(_)
            | SurveyError::Completed => StatusCode::CONFLICT,
            SurveyError::InvalidChoice { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            SurveyError::InsufficientStimuli { .. }
            | SurveyError::InsufficientSources { .. }
            | SurveyError::InvalidConfig(_)
            | SurveyError::InvalidSize(_) => StatusCode::BAD_REQUEST,
            SurveyError::Io { .. } | SurveyError::Corrupt { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, SurveyError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

#[derive(Debug, Default, Deserialize)]
struct CreateRequest {
    seed: Option<u64>,
    order: Option<SectionOrder>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
    pub n_tasks: usize,
}

async fn create(
    State(app): State<AppState>,
    body: Option<Json<CreateRequest>>,
) -> ApiResult<(StatusCode, Json<CreateResponse>)> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let mut cfg = app.session_defaults.clone();
    cfg.seed = req.seed.unwrap_or_else(rand::random);
    if let Some(order) = req.order {
        cfg.order = order;
    }
    let session = blocking(move || app.store.create(&app.manifest, &cfg)).await?;
    Ok((
        StatusCode::CREATED,
        Json(CreateResponse { session_id: session.session_id, n_tasks: session.task_sequence.len() }),
    ))
}

#[derive(Debug, Deserialize)]
struct SectionQuery {
    section: Cue,
}

fn stimulus_url(path: &str) -> String {
    format!("/stimuli/{}", path.trim_start_matches('/'))
}

async fn familiarization(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SectionQuery>,
) -> ApiResult<Json<serde_json::Value>> {
    let session = app.store.session(&id)?;
    let set = familiarization_set(&session, &app.manifest, q.section)?;
    let images: serde_json::Map<String, serde_json::Value> = set
        .into_iter()
        .map(|(sc, paths)| (sc, serde_json::json!(paths.iter().map(|p| stimulus_url(p)).collect::<Vec<_>>())))
        .collect();
    Ok(Json(serde_json::json!({ "section": q.section, "images": images })))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NextResponse {
    pub cursor: usize,
    pub total: usize,
    pub completed: bool,
    pub task: Option<Task>,
    pub image_url: Option<String>,
    pub noise_url: Option<String>,
    pub noise_duration_ms: Option<u64>,
}

async fn next(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<NextResponse>> {
    let session = app.store.session(&id)?;
    let task = session.current_task().cloned();
    let image_url =
        task.as_ref().and_then(|t| app.manifest.stimulus(&t.stimulus_id)).map(|s| stimulus_url(&s.image_path));
    let noise_url = task.as_ref().filter(|t| t.noise_before).map(|t| {
        format!("/noise/{}", refined_bias_core::rng::derive_seed(session.seed, &format!("noise:{}", t.index)))
    });
    Ok(Json(NextResponse {
        cursor: session.cursor,
        total: session.task_sequence.len(),
        completed: session.completed,
        task,
        image_url,
        noise_duration_ms: noise_url.is_some().then_some(app.noise_duration_ms),
        noise_url,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub index: usize,
    pub choice: String,
    #[serde(default)]
    pub response_time_ms: u64,
}

async fn respond(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<SubmitRequest>,
) -> ApiResult<Json<refined_bias_core::survey::Ack>> {
    let ack = blocking(move || app.store.submit(&id, req.index, &req.choice, req.response_time_ms)).await?;
    Ok(Json(ack))
}

async fn noise(Path(seed): Path<u64>) -> ApiResult<Response> {
    let img = tokio::task::spawn_blocking(move || generate_pink_noise(NOISE_SIZE, seed))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(([(header::CONTENT_TYPE, "image/png")], img.png_bytes()).into_response())
}

async fn export(State(app): State<AppState>, headers: HeaderMap) -> ApiResult<Response> {
    let Some(token) = &app.export_token else {
        return Err(ApiError(StatusCode::UNAUTHORIZED, "export disabled: no token configured".into()));
    };
    let presented =
        headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer "));
    if presented != Some(token.as_str()) {
        return Err(ApiError(StatusCode::UNAUTHORIZED, "missing or wrong bearer token".into()));
    }
    let seed = app.export_seed;
    let app2 = app.clone();
    let matrices = blocking(move || export_responses(&app2.store, seed)).await?;
    Ok(Json(matrices).into_response())
}

/// Resolve a request path under `root`, refusing anything that could escape it.
fn safe_join(root: &FsPath, rel: &str) -> Option<PathBuf> {
    let rel = FsPath::new(rel);
    if rel.components().all(|c| matches!(c, Component::Normal(_))) {
        Some(root.join(rel))
    } else {
        None
    }
}

async fn stimulus(State(app): State<AppState>, Path(rel): Path<String>) -> ApiResult<Response> {
    let not_found = || ApiError(StatusCode::NOT_FOUND, format!("no stimulus file {rel:?}"));
    let path = safe_join(&app.stimuli_root, &rel).ok_or_else(not_found)?;
    let bytes = tokio::fs::read(&path).await.map_err(|_| not_found())?;
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg") | Some("jpeg") => "image/jpeg",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

pub fn router(config: ServerConfig) -> Router {
    let state: AppState = Arc::new(config);
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/familiarization", get(familiarization))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/responses", post(respond))
        .route("/noise/{seed}", get(noise))
        .route("/export", get(export))
        .route("/stimuli/{*path}", get(stimulus))
        .with_state(state)
}

pub async fn serve(config: ServerConfig, addr: std::net::SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(config)).await?;
    Ok(())
}
