use axum::extract::{Path, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::HeaderMap;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::json;
use tagdeck::board::TagId;
use tagdeck::preview::{commit_slider_step, Lookup, PreviewKind};

use super::{check_revision, mutation, ApiJson, OptJson};
use crate::error::ApiError;
use crate::state::AppState;

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleRequest {
    /// One tag; all active tags within the budget when absent.
    pub tag_id: Option<TagId>,
    pub kinds: Option<Vec<PreviewKind>>,
}

pub async fn schedule(
    State(state): State<AppState>,
    Path(board): Path<String>,
    OptJson(req): OptJson<ScheduleRequest>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let ctx = s.slide_context();
    let job_ids = match &req.tag_id {
        Some(id) => {
            let kinds = req.kinds.unwrap_or_else(|| PreviewKind::ALL.to_vec());
            s.previews.schedule(id, &s.board, &s.assets, &kinds, ctx)?
        }
        None => s.previews.auto_schedule(&s.board, &s.assets, ctx),
    };
    Ok(Json(json!({ "jobIds": job_ids })).into_response())
}

pub async fn alternatives(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let id = TagId(tag);
    s.board.tag(&id)?;
    Ok(Json(s.previews.get_alternatives(&id)?).into_response())
}

pub async fn slider(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let id = TagId(tag);
    s.board.tag(&id)?;
    Ok(Json(s.previews.get_slider(&id)?).into_response())
}

#[derive(Debug, Deserialize)]
pub struct CommitStep {
    pub step: usize,
}

/// Sets the tag to a step of its current slider.
pub async fn commit_slider(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<CommitStep>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let id = TagId(tag);
    s.board.tag(&id)?;
    let spec = match s.previews.get_slider(&id)? {
        Lookup::Fresh(spec) => spec,
        Lookup::Pending => return Err(ApiError::conflict("the slider for this tag is not ready")),
        Lookup::Failed(m) => return Err(ApiError::conflict(format!("the slider for this tag failed: {m}"))),
    };
    commit_slider_step(&mut s.board, &spec, req.step)?;
    s.after_mutation(state.config().auto_previews);
    Ok(mutation(&s.board, vec![id]))
}

#[derive(Debug, Deserialize)]
pub struct PreviewValue {
    pub value: String,
}

/// Renders the current slide with the tag set to `value`.
pub async fn preview_value(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
    ApiJson(req): ApiJson<PreviewValue>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let (engine, b, assets, ctx) = {
        let s = shared.lock().await;
        (s.previews.clone(), s.board.clone(), s.assets.clone(), s.slide_context())
    };
    let artifact = engine
        .preview_for_value(&TagId(tag), &req.value, &b, &assets, ctx.as_ref())
        .await?;
    Ok(Json(artifact).into_response())
}

pub async fn artifact(
    State(state): State<AppState>,
    Path((board, preview)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let a = s
        .previews
        .artifact(&preview)
        .ok_or_else(|| ApiError::not_found(format!("preview {preview} not found")))?;
    Ok(Json(a).into_response())
}

pub async fn artifact_html(
    State(state): State<AppState>,
    Path((board, preview)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let a = s
        .previews
        .artifact(&preview)
        .ok_or_else(|| ApiError::not_found(format!("preview {preview} not found")))?;
    Ok(([(CONTENT_TYPE, "text/html; charset=utf-8")], a.html).into_response())
}

pub async fn metrics(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    Ok(Json(s.previews.metrics()).into_response())
}
