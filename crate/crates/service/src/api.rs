//! HTTP routes. Bodies are parsed by hand so malformed input always gets a
//! structured error rather than the framework's plain-text rejection.

use std::path::PathBuf;
use std::sync::Arc;

use advisor_core::consultation::{current_step, explanation, start_session, submit_answer, ExplanationEntry};
use advisor_core::kb_admin::{load_snapshot, modularity_report, validate_all, KbStore, ModularityReport};
use advisor_core::knowledge_model::{kb_stats, Catalogue, ChangeSet, KbStats};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{StatusCode, Uri};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::error::ApiError;
use crate::store::{LiveSession, SessionStore};
use crate::views::{SessionBody, StepBody, StepView};

pub struct AppState {
    pub kb_dir: PathBuf,
    pub kb: KbStore,
    pub sessions: SessionStore,
}

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/catalogue", get(catalogue))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/answers", post(answer))
        .route("/api/sessions/{id}/explanation", get(get_explanation))
        .route("/api/kb/reload", post(reload))
        .route("/api/kb/validate", post(validate))
        .route("/api/kb/stats", get(stats))
        .route("/api/settings", put(settings))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .layer(CorsLayer::permissive())
        .with_state(state)
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(e.to_string()))
}

async fn not_found(uri: Uri) -> ApiError {
    ApiError::NotFound(uri.path().to_string())
}

async fn method_not_allowed() -> ApiError {
    ApiError::MethodNotAllowed
}

async fn health(State(st): Shared) -> Json<Value> {
    Json(json!({"status": "ok", "kb_version": st.kb.current().version}))
}

#[derive(Serialize)]
struct CatalogueBody {
    kb_version: u64,
    #[serde(flatten)]
    catalogue: Catalogue,
}

async fn catalogue(State(st): Shared) -> Json<CatalogueBody> {
    let snap = st.kb.current();
    Json(CatalogueBody { kb_version: snap.version, catalogue: snap.catalogue.clone() })
}

#[derive(Deserialize)]
struct CreateSession {
    topic_id: String,
}

async fn create_session(State(st): Shared, body: Bytes) -> ApiResult<(StatusCode, Json<StepBody>)> {
    let req: CreateSession = parse(&body)?;
    let snap = st.kb.current();
    let (session, step) = start_session(&snap.catalogue, snap.kb.clone(), snap.version, &req.topic_id)?;
    let body = StepBody::new(&session, step, &snap.catalogue);
    st.sessions.insert(LiveSession { session, kb: snap })?;
    Ok((StatusCode::CREATED, Json(body)))
}

#[derive(Deserialize)]
struct AnswerRequest {
    query_id: String,
    answer: String,
}

async fn answer(State(st): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<StepBody>> {
    let req: AnswerRequest = parse(&body)?;
    let handle = st.sessions.get(&id).ok_or(ApiError::UnknownSession(id))?;
    let mut live = handle.lock().await;
    let mut next = live.session.clone();
    let step = submit_answer(&mut next, &live.kb.catalogue, &req.query_id, &req.answer)?;
    st.sessions.persist(&next)?;
    live.session = next;
    Ok(Json(StepBody::new(&live.session, step, &live.kb.catalogue)))
}

async fn get_session(State(st): Shared, Path(id): Path<String>) -> ApiResult<Json<SessionBody>> {
    let handle = st.sessions.get(&id).ok_or(ApiError::UnknownSession(id))?;
    let live = handle.lock().await;
    let s = &live.session;
    let step = current_step(s, &live.kb.catalogue)?;
    Ok(Json(SessionBody {
        session_id: s.id.clone(),
        topic_id: s.topic_id.clone(),
        kb_version: s.kb_version,
        status: s.status.clone(),
        answers: s.answer_log.clone(),
        created_at: s.created_at,
        step: StepView::new(step, &live.kb.catalogue),
    }))
}

#[derive(Serialize)]
struct ExplanationBody {
    session_id: String,
    trace: Vec<ExplanationEntry>,
}

async fn get_explanation(State(st): Shared, Path(id): Path<String>) -> ApiResult<Json<ExplanationBody>> {
    let handle = st.sessions.get(&id).ok_or(ApiError::UnknownSession(id.clone()))?;
    let live = handle.lock().await;
    Ok(Json(ExplanationBody { session_id: id, trace: explanation(&live.session) }))
}

async fn reload(State(st): Shared) -> ApiResult<Json<Value>> {
    let state = Arc::clone(&st);
    let snap = tokio::task::spawn_blocking(move || state.kb.reload_kb(&state.kb_dir))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    tracing::info!(version = snap.version, "knowledge base reloaded");
    Ok(Json(json!({"version": snap.version})))
}

async fn validate(State(st): Shared) -> ApiResult<Json<Value>> {
    let dir = st.kb_dir.clone();
    let report = tokio::task::spawn_blocking(move || match load_snapshot(&dir, 0) {
        Ok(snap) => Ok(validate_all(&snap)),
        Err(e @ advisor_core::kb_admin::AdminError::Io { .. }) => Err(ApiError::from(e)),
        Err(e) => Ok(e.report()),
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(Json(json!({"ok": !report.has_errors(), "diagnostics": report})))
}

#[derive(Serialize)]
struct StatsBody {
    kb_version: u64,
    #[serde(flatten)]
    stats: KbStats,
    modularity: ModularityReport,
}

async fn stats(State(st): Shared) -> Json<StatsBody> {
    let snap = st.kb.current();
    Json(StatsBody {
        kb_version: snap.version,
        stats: kb_stats(&snap.catalogue, &snap.kb),
        modularity: modularity_report(&snap.kb),
    })
}

#[derive(Deserialize)]
struct SettingsRequest {
    changes: ChangeSet,
}

async fn settings(State(st): Shared, body: Bytes) -> ApiResult<Json<Value>> {
    let req: SettingsRequest = parse(&body)?;
    let snap = st.kb.apply_settings(&req.changes)?;
    tracing::info!(version = snap.version, "settings amended");
    Ok(Json(json!({"version": snap.version})))
}
