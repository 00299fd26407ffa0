//! JSON-over-HTTP front end for the workflow.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use teaser_core::export::RenderProfile;
use teaser_core::extraction::MomentQuery;
use teaser_core::finishing::FinishSettings;
use teaser_core::model::{FeatureBundle, SentenceId};
use teaser_core::production::EffectKind;

use crate::config::{Backends, ServiceConfig};
use crate::store::{ProjectStore, StoreError};
use crate::workflow::{BackendChoice, ExportKind, MusicRequest, TeaserProject, TransitionRequest, WorkflowError};

pub struct AppState {
    pub store: ProjectStore,
    pub backends: Backends,
    pub config: ServiceConfig,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(store: ProjectStore, backends: Backends, config: ServiceConfig) -> Self {
        AppState {
            store,
            backends,
            config,
            locks: Mutex::new(HashMap::new()),
        }
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    fn render_profile(&self) -> RenderProfile {
        RenderProfile {
            asset_root: self.config.asset_root.clone(),
            ..RenderProfile::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error("invalid request body: {0}")]
    Body(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degraded: Option<bool>,
}

impl ApiError {
    fn status_and_kind(&self) -> (StatusCode, &'static str) {
        match self {
            ApiError::Store(StoreError::NotFound(_)) => (StatusCode::NOT_FOUND, "not_found"),
            ApiError::Store(StoreError::Bundle(_)) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_bundle"),
            ApiError::Store(_) | ApiError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
            ApiError::Workflow(WorkflowError::Step { .. }) => (StatusCode::CONFLICT, "step_order"),
            ApiError::Workflow(WorkflowError::Validation(_)) | ApiError::Body(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "validation")
            }
            ApiError::Workflow(WorkflowError::Backend { .. }) => (StatusCode::BAD_GATEWAY, "backend"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = self.status_and_kind();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        let degraded = match &self {
            ApiError::Workflow(WorkflowError::Backend { degraded, .. }) => Some(*degraded),
            _ => None,
        };
        let body = ErrorBody {
            error: self.to_string(),
            kind: kind.into(),
            degraded,
        };
        (status, Json(body)).into_response()
    }
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<Json<T>, ApiError>;

/// Parses a JSON body; an empty body reads as `{}`.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) { b"{}" } else { bytes };
    serde_json::from_slice(bytes).map_err(|e| ApiError::Body(e.to_string()))
}

/// Runs `f` on the stored project under its lock and saves the result.
async fn mutate<T, F>(state: Shared, id: String, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut TeaserProject, &FeatureBundle, &AppState) -> Result<T, WorkflowError> + Send + 'static,
{
    let lock = state.lock_for(&id);
    let _guard = lock.lock().await;
    tokio::task::spawn_blocking(move || {
        let dir = state.store.dir(&id)?;
        let mut project = dir.load()?;
        let bundle = dir.bundle()?;
        let out = f(&mut project, &bundle, &state)?;
        dir.save(&project)?;
        Ok(Json(out))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn read<T, F>(state: Shared, id: String, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&TeaserProject, &FeatureBundle, &AppState) -> Result<T, WorkflowError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || {
        let dir = state.store.dir(&id)?;
        let project = dir.load()?;
        let bundle = dir.bundle()?;
        Ok(f(&project, &bundle, &state)?)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub step: crate::workflow::Step,
}

async fn create_project(State(state): State<Shared>, req: Request) -> ApiResult<Created> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let bytes = if is_multipart {
        let mut form = Multipart::from_request(req, &state)
            .await
            .map_err(|e| ApiError::Body(e.to_string()))?;
        let mut found = None;
        while let Some(field) = form.next_field().await.map_err(|e| ApiError::Body(e.to_string()))? {
            if field.name() == Some("bundle") {
                found = Some(field.bytes().await.map_err(|e| ApiError::Body(e.to_string()))?);
            }
        }
        found.ok_or_else(|| ApiError::Body("multipart form has no 'bundle' field".into()))?
    } else {
        Bytes::from_request(req, &state)
            .await
            .map_err(|e| ApiError::Body(e.to_string()))?
    };
    let st = state.clone();
    let (project, _) = tokio::task::spawn_blocking(move || st.store.create(&bytes))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    tracing::info!(id = %project.id, "project created");
    Ok(Json(Created {
        id: project.id,
        step: project.step,
    }))
}

async fn get_project(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<TeaserProject> {
    read(state, id, |p, _, _| Ok(p.clone())).await.map(Json)
}

#[derive(Debug, Deserialize)]
struct BackendParam {
    backend: Option<BackendChoice>,
}

async fn keywords(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<BackendParam>,
) -> ApiResult<Vec<teaser_core::extraction::KeywordSuggestion>> {
    read(state, id, move |_, b, st| {
        let choice = q.backend.unwrap_or(st.config.backend);
        crate::workflow::keyword_suggestions(b, &st.backends.engine(choice), choice)
    })
    .await
    .map(Json)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExtractBody {
    #[serde(flatten)]
    pub query: MomentQuery,
    #[serde(default)]
    pub backend: Option<BackendChoice>,
}

#[derive(Debug, Deserialize)]
struct PageParam {
    page: Option<usize>,
}

async fn extract(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(page): Query<PageParam>,
    bytes: Bytes,
) -> ApiResult<crate::workflow::CandidatePage> {
    match page.page {
        Some(n) if n > 0 => {
            mutate(state, id, move |p, b, st| {
                let engine = st.backends.engine(p.backend);
                p.page(b, &engine, n).map(|(page, _)| page)
            })
            .await
        }
        _ => {
            let req: ExtractBody = body(&bytes)?;
            mutate(state, id, move |p, b, st| {
                let choice = req.backend.unwrap_or(st.config.backend);
                p.extract(b, &st.backends.engine(choice), req.query, choice)
            })
            .await
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectBody {
    pub candidate: usize,
}

async fn select(
    State(state): State<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<teaser_core::extraction::Moment> {
    let req: SelectBody = body(&bytes)?;
    mutate(state, id, move |p, _, _| p.select(req.candidate)).await
}

#[derive(Debug, Deserialize)]
struct ContextParam {
    k: Option<usize>,
}

async fn refine_context(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<ContextParam>,
) -> ApiResult<teaser_core::refine::RefineContext> {
    read(state, id, move |p, b, _| p.refine_context(b, q.k)).await.map(Json)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionBody {
    pub ids: Vec<SentenceId>,
    #[serde(default)]
    pub remove_fillers: bool,
}

async fn put_selection(
    State(state): State<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<crate::workflow::SelectionSummary> {
    let req: SelectionBody = body(&bytes)?;
    mutate(state, id, move |p, b, _| p.set_selection(b, &req.ids, req.remove_fillers)).await
}

async fn transitions(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<crate::workflow::TransitionView> {
    read(state, id, |p, _, _| p.transitions()).await.map(Json)
}

fn effect_kind(name: &str) -> Result<EffectKind, ApiError> {
    match name {
        "zoom" => Ok(EffectKind::Zoom),
        "reaction" => Ok(EffectKind::ReactionShot),
        other => Err(ApiError::Body(format!("unknown transition '{other}' (expected zoom or reaction)"))),
    }
}

#[derive(Debug, Default, Deserialize)]
struct ZoomBody {
    scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct ReactionBody {
    at_ms: Option<u64>,
}

async fn add_transition(
    State(state): State<Shared>,
    Path((id, boundary, kind)): Path<(String, usize, String)>,
    bytes: Bytes,
) -> ApiResult<crate::workflow::TransitionView> {
    let req = match effect_kind(&kind)? {
        EffectKind::Zoom => TransitionRequest::Zoom {
            scale: body::<ZoomBody>(&bytes)?.scale,
        },
        EffectKind::ReactionShot => TransitionRequest::Reaction {
            at_ms: body::<ReactionBody>(&bytes)?.at_ms,
        },
    };
    mutate(state, id, move |p, b, _| p.add_transition(b, boundary, &req)).await
}

async fn remove_transition(
    State(state): State<Shared>,
    Path((id, boundary, kind)): Path<(String, usize, String)>,
) -> ApiResult<crate::workflow::TransitionView> {
    let kind = effect_kind(&kind)?;
    mutate(state, id, move |p, _, _| p.remove_transition(boundary, kind)).await
}

async fn music(
    State(state): State<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<crate::workflow::MusicState> {
    let req: MusicRequest = body(&bytes)?;
    mutate(state, id, move |p, b, st| p.set_music(b, &st.backends.engine(p.backend), &req)).await
}

async fn finish(
    State(state): State<Shared>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<crate::workflow::FinishState> {
    let req: FinishSettings = body(&bytes)?;
    mutate(state, id, move |p, b, _| p.finish(b, req)).await
}

async fn export(State(state): State<Shared>, Path((id, kind)): Path<(String, String)>) -> Result<Response, ApiError> {
    let kind: ExportKind = kind.parse().map_err(ApiError::Body)?;
    let bytes = read(state, id, move |p, b, st| p.export(b, kind, &st.render_profile())).await?;
    let content_type = match kind {
        ExportKind::Edl => "application/json",
        ExportKind::Srt => "application/x-subrip; charset=utf-8",
        ExportKind::Vtt => "text/vtt; charset=utf-8",
        ExportKind::RenderScript => "text/x-shellscript; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, HeaderValue::from_static(content_type))], bytes).into_response())
}

async fn preview(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<crate::workflow::Preview> {
    read(state, id, |p, b, _| p.preview(b)).await.map(Json)
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/projects", post(create_project))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/keywords", get(keywords))
        .route("/projects/{id}/extract", post(extract))
        .route("/projects/{id}/select", post(select))
        .route("/projects/{id}/refine/context", get(refine_context))
        .route("/projects/{id}/selection", put(put_selection))
        .route("/projects/{id}/transitions", get(transitions))
        .route(
            "/projects/{id}/transitions/{boundary}/{kind}",
            post(add_transition).delete(remove_transition),
        )
        .route("/projects/{id}/music", post(music))
        .route("/projects/{id}/finish", post(finish))
        .route("/projects/{id}/export/{kind}", get(export))
        .route("/projects/{id}/preview", get(preview))
        .with_state(state)
}

/// Binds `config.bind_addr` and serves until interrupted.
pub async fn serve(state: AppState) -> std::io::Result<()> {
    let addr = state.config.bind_addr;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
