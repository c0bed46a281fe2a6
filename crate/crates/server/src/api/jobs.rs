use axum::extract::{Path, State};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::json;

use super::ApiQuery;
use crate::error::ApiError;
use crate::state::AppState;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobFilter {
    pub board_id: Option<String>,
}

pub async fn list(State(state): State<AppState>, ApiQuery(q): ApiQuery<JobFilter>) -> Response {
    Json(state.jobs(q.board_id.as_deref())).into_response()
}

pub async fn get_job(State(state): State<AppState>, Path(job): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(state.job(&job)?).into_response())
}

/// The result of a finished job. Conflict while it is still queued or
/// running; a failed job reports its error.
pub async fn result(State(state): State<AppState>, Path(job): Path<String>) -> Result<Response, ApiError> {
    let j = state.job(&job)?;
    if let Some(failure) = &j.error {
        return Ok(Json(json!({ "jobId": j.job_id, "status": j.status, "error": failure })).into_response());
    }
    let j = match j.result {
        Some(_) => j,
        None => {
            return Err(ApiError::conflict(format!("job {job} is {:?}, not done", j.status)));
        }
    };
    Ok(Json(json!({
        "jobId": j.job_id,
        "kind": j.kind,
        "status": j.status,
        "stale": j.stale,
        "applied": j.applied,
        "result": j.result,
    }))
    .into_response())
}

pub async fn cancel(State(state): State<AppState>, Path(job): Path<String>) -> Result<Response, ApiError> {
    let (j, cancelled) = state.cancel_job(&job)?;
    Ok(Json(json!({ "cancelled": cancelled, "job": j })).into_response())
}

pub async fn apply(State(state): State<AppState>, Path(job): Path<String>) -> Result<Response, ApiError> {
    let applied = state.apply_job(&job).await?;
    Ok(Json(json!({ "jobId": job, "applied": applied })).into_response())
}
