//! Session-oriented HTTP front end for interactive sketch search.
//!
//! Every mutation recomputes results from the session's current sketch, so
//! what a client sees always equals a fresh query.

pub mod error;
pub mod session;
pub mod thumbnail;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sketchscreen_core::recognizer::Prediction;
use sketchscreen_core::scorer::ScoredScreen;
use sketchscreen_core::stroke::{Canvas, RawStroke};
use sketchscreen_core::DoodleClass;

pub use error::ApiError;
pub use session::{Engine, Session, SessionStore};

pub const DEFAULT_RESULTS: usize = 10;
pub const MAX_RESULTS: usize = 50;

pub struct App {
    pub engine: Engine,
    pub sessions: SessionStore,
}

impl App {
    pub fn new(engine: Engine) -> Self {
        Self {
            engine,
            sessions: SessionStore::default(),
        }
    }
}

type AppState = Arc<App>;

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StrokeRequest {
    pub canvas: Canvas,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionsResponse {
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct ConfirmRequest {
    #[serde(default)]
    pub class: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultsResponse {
    pub results: Vec<ScoredScreen>,
}

#[derive(Debug, Deserialize)]
pub struct ResultsQuery {
    pub n: Option<String>,
}

pub fn router(app: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/strokes", post(submit_stroke))
        .route("/sessions/{id}/strokes/undo", post(undo_stroke))
        .route("/sessions/{id}/strokes/redo", post(redo_stroke))
        .route("/sessions/{id}/elements", post(confirm_element))
        .route("/sessions/{id}/elements/last", delete(remove_last))
        .route("/sessions/{id}/results", get(get_results))
        .route("/screens/{id}/thumbnail", get(thumbnail))
        .with_state(app)
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes, allow_empty: bool) -> Result<T, ApiError> {
    if allow_empty && body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::Validation {
        code: "invalid_body",
        detail: e.to_string(),
    })
}

fn parse_n(raw: Option<&str>) -> Result<usize, ApiError> {
    let Some(raw) = raw else {
        return Ok(DEFAULT_RESULTS);
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if (1..=MAX_RESULTS).contains(&n) => Ok(n),
        _ => Err(ApiError::InvalidN {
            got: raw.to_string(),
            max: MAX_RESULTS,
        }),
    }
}

async fn create_session(State(app): State<AppState>) -> Json<SessionCreated> {
    Json(SessionCreated {
        id: app.sessions.create().to_string(),
    })
}

fn predictions(session: &Session) -> Json<PredictionsResponse> {
    Json(PredictionsResponse {
        predictions: session.predictions.clone(),
    })
}

impl Default for StrokeRequest {
    fn default() -> Self {
        Self {
            canvas: Canvas::new(0, 0),
            points: Vec::new(),
        }
    }
}

async fn submit_stroke(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<PredictionsResponse>, ApiError> {
    let slot = app.sessions.get(&id)?;
    let req: StrokeRequest = parse_body(&body, false)?;
    let mut session = slot.lock().expect("session poisoned");
    session.submit_stroke(&app.engine, RawStroke::from(req.points), req.canvas)?;
    Ok(predictions(&session))
}

async fn undo_stroke(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<PredictionsResponse>, ApiError> {
    let slot = app.sessions.get(&id)?;
    let mut session = slot.lock().expect("session poisoned");
    session.undo(&app.engine)?;
    Ok(predictions(&session))
}

async fn redo_stroke(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<PredictionsResponse>, ApiError> {
    let slot = app.sessions.get(&id)?;
    let mut session = slot.lock().expect("session poisoned");
    session.redo(&app.engine)?;
    Ok(predictions(&session))
}

async fn confirm_element(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ResultsResponse>, ApiError> {
    let slot = app.sessions.get(&id)?;
    let req: ConfirmRequest = parse_body(&body, true)?;
    let choice = req
        .class
        .map(|c| c.parse::<DoodleClass>())
        .transpose()
        .map_err(|e| ApiError::Validation {
            code: "unknown_class",
            detail: e.to_string(),
        })?;
    let mut session = slot.lock().expect("session poisoned");
    session.confirm(choice)?;
    let results = app.engine.results(&session.sketch, DEFAULT_RESULTS)?;
    Ok(Json(ResultsResponse { results }))
}

async fn remove_last(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<ResultsResponse>, ApiError> {
    let slot = app.sessions.get(&id)?;
    let mut session = slot.lock().expect("session poisoned");
    session.remove_last();
    let results = app.engine.results(&session.sketch, DEFAULT_RESULTS)?;
    Ok(Json(ResultsResponse { results }))
}

async fn get_results(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ResultsQuery>,
) -> Result<Json<ResultsResponse>, ApiError> {
    let slot = app.sessions.get(&id)?;
    let n = parse_n(q.n.as_deref())?;
    let sketch = slot.lock().expect("session poisoned").sketch.clone();
    let results = app.engine.results(&sketch, n)?;
    Ok(Json(ResultsResponse { results }))
}

async fn thumbnail(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let screen = app
        .engine
        .index
        .screen_number(&id)
        .ok_or_else(|| ApiError::UnknownScreen(id.clone()))?;
    let svg = thumbnail::render_svg(&app.engine.index, screen);
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg))
}
