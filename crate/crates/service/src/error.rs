use advisor_core::consultation::ConsultError;
use advisor_core::diagnostics::ValidationReport;
use advisor_core::kb_admin::AdminError;
use advisor_core::knowledge_model::{KnowledgeError, SettingsError};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use crate::store::StoreError;

/// Every failure the API reports. Each maps to one status and one machine code.
#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Consult(#[from] ConsultError),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("malformed request body: {0}")]
    BadRequest(String),
    #[error(transparent)]
    InvalidSettings(SettingsError),
    #[error("knowledge base failed validation")]
    InvalidKb(ValidationReport),
    #[error("knowledge base unavailable: {0}")]
    KbUnavailable(String),
    #[error(transparent)]
    Storage(#[from] StoreError),
    #[error("no route for {0}")]
    NotFound(String),
    #[error("method not allowed")]
    MethodNotAllowed,
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<&'a ValidationReport>,
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Consult(e) => match e {
                ConsultError::Knowledge(KnowledgeError::UnknownTopic(_)) => "unknown_topic",
                ConsultError::Knowledge(KnowledgeError::UnknownLawLink(_)) => "unknown_law_link",
                ConsultError::Knowledge(KnowledgeError::Json { .. }) => "malformed_knowledge",
                ConsultError::Engine(_) => "engine_error",
                ConsultError::BinaryViolation(_) => "binary_violation",
                ConsultError::StaleQuery { .. } => "stale_query",
                ConsultError::SessionClosed(_) => "session_closed",
                ConsultError::UnknownQuery(_) => "unknown_query",
                ConsultError::NoDecision => "no_decision",
                ConsultError::InvalidDecisionCode(_) => "invalid_decision_code",
                ConsultError::Incomplete(_) => "incomplete",
                ConsultError::TrailingAnswers(_) => "trailing_answers",
                ConsultError::KbMismatch => "kb_mismatch",
            },
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::InvalidSettings(_) => "invalid_settings",
            ApiError::InvalidKb(_) => "invalid_kb",
            ApiError::KbUnavailable(_) => "kb_unavailable",
            ApiError::Storage(_) => "storage_error",
            ApiError::NotFound(_) => "not_found",
            ApiError::MethodNotAllowed => "method_not_allowed",
            ApiError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Consult(e) => match e {
                ConsultError::Knowledge(KnowledgeError::UnknownTopic(_)) => StatusCode::NOT_FOUND,
                ConsultError::BinaryViolation(_)
                | ConsultError::Incomplete(_)
                | ConsultError::TrailingAnswers(_) => StatusCode::BAD_REQUEST,
                ConsultError::StaleQuery { .. } | ConsultError::SessionClosed(_) | ConsultError::KbMismatch => {
                    StatusCode::CONFLICT
                }
                ConsultError::Knowledge(_)
                | ConsultError::Engine(_)
                | ConsultError::UnknownQuery(_)
                | ConsultError::NoDecision
                | ConsultError::InvalidDecisionCode(_) => StatusCode::INTERNAL_SERVER_ERROR,
            },
            ApiError::UnknownSession(_) | ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::InvalidSettings(_) | ApiError::InvalidKb(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::KbUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::MethodNotAllowed => StatusCode::METHOD_NOT_ALLOWED,
            ApiError::Storage(_) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<AdminError> for ApiError {
    fn from(e: AdminError) -> Self {
        match e {
            AdminError::Io { .. } => ApiError::KbUnavailable(e.to_string()),
            AdminError::Settings(s) => ApiError::InvalidSettings(s),
            other => ApiError::InvalidKb(other.report()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let diagnostics = match &self {
            ApiError::InvalidKb(report) => Some(report),
            _ => None,
        };
        let body = ErrorBody { code: self.code(), message: self.to_string(), diagnostics };
        (self.status(), Json(body)).into_response()
    }
}
