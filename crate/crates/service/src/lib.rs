//! HTTP API for study sessions, with a server-sent-events stream that
//! announces recommendations computed after a move.
//!
//! | Method | Path | |
//! |---|---|---|
//! | GET | `/games` | bundled games |
//! | POST | `/sessions` | create a session |
//! | GET | `/sessions/{id}` | current view |
//! | POST | `/sessions/{id}/actions` | submit a move |
//! | GET | `/sessions/{id}/events` | view updates as server-sent events |
//! | GET | `/sessions/{id}/clips/{clip}` | a preference-review clip |
//! | POST | `/sessions/{id}/votes` | vote for a clip's best output |
//! | GET | `/admin/sessions` | session ids |
//! | GET | `/admin/sessions/{id}/log` | the session log, one record per line |
//! | GET | `/admin/sessions/{id}/report` | metrics for finished games |

mod store;

use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use ids_core::explain::ExplanationMode;
use ids_core::games;
use ids_core::metrics::{MetricsReport, StudyCondition};
use ids_core::planner::PlannerBudget;
use ids_core::session::{Clip, SessionError, SessionView, StudyGames};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

pub use store::{Store, StoreError};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub storage_dir: PathBuf,
    pub bind: SocketAddr,
    pub default_seed: u64,
    pub budget: PlannerBudget,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError(StoreError);

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError(e)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(StoreError::Session(e))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            StoreError::UnknownSession(_) => StatusCode::NOT_FOUND,
            StoreError::Session(e) => match e {
                SessionError::IllegalAction(_) => StatusCode::UNPROCESSABLE_ENTITY,
                SessionError::UnknownClip(_) => StatusCode::NOT_FOUND,
                SessionError::StaleSeq { .. }
                | SessionError::Finished
                | SessionError::VotingClosed
                | SessionError::DuplicateVote(_) => StatusCode::CONFLICT,
                SessionError::Corrupt(_) | SessionError::BudgetExhausted => StatusCode::INTERNAL_SERVER_ERROR,
            },
            StoreError::Io(_) | StoreError::Recovery { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.0.to_string() })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct GameSummary {
    pub game_id: String,
    pub title: String,
    pub meals: Vec<String>,
}

async fn list_games() -> Json<Vec<GameSummary>> {
    let out = games::BUNDLED
        .iter()
        .filter_map(|(id, _)| games::load(id).ok())
        .map(|g| GameSummary {
            game_id: g.id().to_string(),
            title: g.config.title.clone(),
            meals: g.config.meals.iter().map(|m| m.name.clone()).collect(),
        })
        .collect();
    Json(out)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSession {
    pub condition: StudyCondition,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub swap_order: Option<bool>,
}

async fn create_session(State(store): State<Arc<Store>>, Json(body): Json<CreateSession>) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let view = store.create(body.condition, body.seed, body.swap_order).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_view(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Json<SessionView>> {
    Ok(Json(store.view(&id).await?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitAction {
    pub seq: u64,
    pub action: String,
    /// Compute the next recommendation before replying.
    #[serde(default)]
    pub wait: bool,
}

async fn submit_action(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Json(body): Json<SubmitAction>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json(store.submit(&id, body.seq, &body.action, body.wait).await?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Vote {
    pub clip: u32,
    pub mode: ExplanationMode,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Ack {
    pub ok: bool,
}

async fn vote(State(store): State<Arc<Store>>, Path(id): Path<String>, Json(body): Json<Vote>) -> ApiResult<Json<Ack>> {
    store.vote(&id, body.clip, body.mode).await?;
    Ok(Json(Ack { ok: true }))
}

async fn clip(State(store): State<Arc<Store>>, Path((id, clip)): Path<(String, u32)>) -> ApiResult<Json<Clip>> {
    let slot = store.slot(&id)?;
    let inner = slot.inner.lock().await;
    Ok(Json(inner.session.clip(clip)?))
}

/// The current view, then every later update.
async fn events(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let slot = store.slot(&id)?;
    let (first, rx) = {
        let inner = slot.inner.lock().await;
        (inner.session.view(), slot.updates.subscribe())
    };
    let updates = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(view) => return Some((view, rx)),
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    let stream = stream::once(async move { first })
        .chain(updates)
        .map(|view| Ok(Event::default().event("view").json_data(&view).expect("views serialize")));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

async fn admin_sessions(State(store): State<Arc<Store>>) -> Json<Vec<String>> {
    Json(store.session_ids())
}

async fn admin_log(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let text = store.export(&id).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionReport {
    pub session_id: String,
    pub condition: StudyCondition,
    pub swap_order: bool,
    pub games: Vec<MetricsReport>,
    pub pref_pct: std::collections::BTreeMap<ExplanationMode, f64>,
}

async fn admin_report(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Json<SessionReport>> {
    let slot = store.slot(&id)?;
    let inner = slot.inner.lock().await;
    let s = &inner.session;
    Ok(Json(SessionReport {
        session_id: s.id().to_string(),
        condition: s.condition(),
        swap_order: s.swap_order(),
        games: s.reports(),
        pref_pct: s.preference_shares(),
    }))
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/games", get(list_games))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_view))
        .route("/sessions/{id}/actions", post(submit_action))
        .route("/sessions/{id}/events", get(events))
        .route("/sessions/{id}/clips/{clip}", get(clip))
        .route("/sessions/{id}/votes", post(vote))
        .route("/admin/sessions", get(admin_sessions))
        .route("/admin/sessions/{id}/log", get(admin_log))
        .route("/admin/sessions/{id}/report", get(admin_report))
        .with_state(store)
}

/// Restores stored sessions and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let study = Arc::new(StudyGames::bundled()?);
    let store = Store::open(&config.storage_dir, study, config.budget, config.default_seed)?;
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    axum::serve(listener, router(store)).await?;
    Ok(())
}
