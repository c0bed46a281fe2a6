use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use tagdeck::board::BoardError;
use tagdeck::ingest::IngestError;
use tagdeck::llm::LlmError;
use tagdeck::pipeline::{JobError, JobFailure, PipelineError};
use tagdeck::preview::PreviewError;
use tagdeck::project::ProjectError;
use tagdeck::prompts::PromptError;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorCode {
    NotFound,
    Conflict,
    BadInput,
    BackendFailure,
    Capability,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::BadInput => StatusCode::BAD_REQUEST,
            ErrorCode::BackendFailure => StatusCode::BAD_GATEWAY,
            ErrorCode::Capability => StatusCode::NOT_IMPLEMENTED,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::NotFound => "notFound",
            ErrorCode::Conflict => "conflict",
            ErrorCode::BadInput => "badInput",
            ErrorCode::BackendFailure => "backendFailure",
            ErrorCode::Capability => "capability",
        }
    }
}

/// The body of every failed request.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
#[error("{message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_reply: Option<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            raw_reply: None,
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Conflict, message)
    }

    pub fn bad_input(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadInput, message)
    }

    pub fn to_failure(&self) -> JobFailure {
        JobFailure {
            code: self.code.as_str().to_string(),
            message: self.message.clone(),
            raw_reply: self.raw_reply.clone(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<BoardError> for ApiError {
    fn from(e: BoardError) -> Self {
        let code = match e {
            BoardError::NotFound(_) => ErrorCode::NotFound,
            _ => ErrorCode::BadInput,
        };
        Self::new(code, e.to_string())
    }
}

impl From<LlmError> for ApiError {
    fn from(e: LlmError) -> Self {
        let code = match e {
            LlmError::Config(_) => ErrorCode::Capability,
            _ => ErrorCode::BackendFailure,
        };
        Self {
            code,
            message: e.to_string(),
            raw_reply: e.raw_reply().map(str::to_string),
        }
    }
}

impl From<PromptError> for ApiError {
    fn from(e: PromptError) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Prompt(e) => e.into(),
            PipelineError::Llm(e) => e.into(),
            PipelineError::Board(e) => e.into(),
            PipelineError::NoSuchSlide(_) => Self::not_found(e.to_string()),
            PipelineError::Range { .. } => Self::bad_input(e.to_string()),
            PipelineError::Conflict { .. } => Self::conflict(e.to_string()),
            PipelineError::Capability(m) => Self::new(ErrorCode::Capability, m),
        }
    }
}

impl From<PreviewError> for ApiError {
    fn from(e: PreviewError) -> Self {
        match e {
            PreviewError::Llm(e) => e.into(),
            PreviewError::Board(e) => e.into(),
            PreviewError::Prompt(e) => e.into(),
            PreviewError::UnknownTag(_) => Self::not_found(e.to_string()),
            PreviewError::Stale { .. } => Self::conflict(e.to_string()),
            PreviewError::Unavailable(_) => Self::new(ErrorCode::Capability, e.to_string()),
            PreviewError::InactiveTag(_) | PreviewError::NotAConcept(_) | PreviewError::StepRange(_) => {
                Self::bad_input(e.to_string())
            }
        }
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Board(e) => e.into(),
            IngestError::UnknownAsset(_) => Self::not_found(e.to_string()),
            IngestError::Search(_) => Self::new(ErrorCode::BackendFailure, e.to_string()),
            _ => Self::bad_input(e.to_string()),
        }
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        Self::bad_input(e.to_string())
    }
}

impl From<JobError> for ApiError {
    fn from(e: JobError) -> Self {
        match e {
            JobError::NotFound(_) => Self::not_found(e.to_string()),
            JobError::LaneBusy { .. } | JobError::NotDone { .. } => Self::conflict(e.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_input(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_input(e.body_text())
    }
}
