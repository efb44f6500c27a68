//! API errors and their HTTP mapping.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

use sketchscreen_core::query::QueryError;
use sketchscreen_core::recognizer::RecognizeError;
use sketchscreen_core::scorer::ScoreError;
use sketchscreen_core::stroke::StrokeError;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown screen {0}")]
    UnknownScreen(String),
    #[error("stroke has no points")]
    EmptyStroke,
    #[error("no pending strokes to confirm")]
    NoPendingStrokes,
    #[error("n must be between 1 and {max}, got {got}")]
    InvalidN { got: String, max: usize },
    #[error("{detail}")]
    Validation { code: &'static str, detail: String },
    #[error(transparent)]
    Stroke(#[from] StrokeError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Recognize(#[from] RecognizeError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::UnknownScreen(_) => "unknown_screen",
            ApiError::EmptyStroke => "empty_stroke",
            ApiError::NoPendingStrokes => "no_pending_strokes",
            ApiError::InvalidN { .. } => "invalid_n",
            ApiError::Validation { code, .. } => code,
            ApiError::Stroke(StrokeError::OutOfBounds { .. }) => "out_of_bounds",
            ApiError::Stroke(StrokeError::InvalidCanvas) => "invalid_canvas",
            ApiError::Stroke(_) => "invalid_stroke",
            ApiError::Query(QueryError::UnknownClass(_)) => "unknown_class",
            ApiError::Query(_) => "invalid_element",
            ApiError::Recognize(_) => "recognizer_error",
            ApiError::Score(_) => "scoring_error",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession(_) | ApiError::UnknownScreen(_) => StatusCode::NOT_FOUND,
            ApiError::Recognize(RecognizeError::UntrainedClass(_)) | ApiError::Score(ScoreError::EmptyIndex) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code(), "detail": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}
