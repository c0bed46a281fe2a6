use axum::extract::{Path, State};
use axum::http::header::ETAG;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::json;
use tagdeck::artifacts::validate_deck;
use tagdeck::board::TagId;
use tagdeck::pipeline::{apply_style_to_deck, apply_variation, JobKind, SessionStatus};

use super::boards::{apply_create, apply_move, CreateTag, EditTag, MoveTag};
use super::{accepted, check_revision, etag, json_ok, mutation, ApiJson, OptJson};
use crate::error::ApiError;
use crate::state::{AppState, VariationResult};

/// Most variations one request may ask for.
pub const MAX_VARIATIONS: u32 = 6;

pub async fn list(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let out: Vec<_> = s
        .slide_sessions
        .values()
        .map(|x| {
            json!({
                "sessionId": x.session_id,
                "slideNumber": x.slide_number,
                "status": x.status,
                "parentDeckRevision": x.parent_deck_revision,
            })
        })
        .collect();
    Ok(Json(out).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OpenSession {
    pub slide_number: u32,
}

/// Starts a grounding job for one slide of the current deck.
pub async fn open(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<OpenSession>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let deck = s
        .deck
        .clone()
        .ok_or_else(|| ApiError::bad_input("generate a deck first"))?;
    check_revision(&headers, deck.revision)?;
    if deck.slide(req.slide_number).is_none() {
        return Err(ApiError::not_found(format!("slide {} does not exist", req.slide_number)));
    }
    let pipeline = state.pipeline().clone();
    let n = req.slide_number;
    let lane = format!("slide-{n}");
    let job = state.spawn_job(&s, JobKind::SlideGrounding, &lane, None, async move {
        Ok(pipeline.open_slide_session(&deck, n).await?)
    })?;
    Ok(accepted(job))
}

pub async fn get_session(
    State(state): State<AppState>,
    Path((board, session)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let x = s.session(&session)?;
    Ok(([(ETAG, etag(x.scoped_board.revision()))], Json(x)).into_response())
}

pub async fn create_tag(
    State(state): State<AppState>,
    Path((board, session)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<CreateTag>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    let x = s.session_mut(&session)?;
    check_revision(&headers, x.scoped_board.revision())?;
    let id = apply_create(&mut x.scoped_board, &req)?;
    x.scoped_board.drain_events();
    let mut resp = mutation(&x.scoped_board, vec![id]);
    *resp.status_mut() = StatusCode::CREATED;
    Ok(resp)
}

pub async fn edit_tag(
    State(state): State<AppState>,
    Path((board, session, tag)): Path<(String, String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<EditTag>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    let x = s.session_mut(&session)?;
    check_revision(&headers, x.scoped_board.revision())?;
    let id = TagId(tag);
    x.scoped_board.edit_tag(&id, &req.label, &req.value)?;
    x.scoped_board.drain_events();
    Ok(mutation(&x.scoped_board, vec![id]))
}

pub async fn move_tag(
    State(state): State<AppState>,
    Path((board, session, tag)): Path<(String, String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<MoveTag>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    let x = s.session_mut(&session)?;
    check_revision(&headers, x.scoped_board.revision())?;
    let id = TagId(tag);
    apply_move(&mut x.scoped_board, &id, &req)?;
    x.scoped_board.drain_events();
    Ok(mutation(&x.scoped_board, vec![id]))
}

pub async fn delete_tag(
    State(state): State<AppState>,
    Path((board, session, tag)): Path<(String, String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    let x = s.session_mut(&session)?;
    check_revision(&headers, x.scoped_board.revision())?;
    let id = TagId(tag);
    x.scoped_board.delete_tag(&id)?;
    x.scoped_board.drain_events();
    Ok(mutation(&x.scoped_board, vec![id]))
}

#[derive(Debug, Deserialize)]
pub struct VariationRequest {
    #[serde(default = "one")]
    pub count: u32,
}

impl Default for VariationRequest {
    fn default() -> Self {
        Self { count: 1 }
    }
}

fn one() -> u32 {
    1
}

pub async fn variations(
    State(state): State<AppState>,
    Path((board, session)): Path<(String, String)>,
    headers: HeaderMap,
    OptJson(req): OptJson<VariationRequest>,
) -> Result<Response, ApiError> {
    if !(1..=MAX_VARIATIONS).contains(&req.count) {
        return Err(ApiError::bad_input(format!("count must be between 1 and {MAX_VARIATIONS}")));
    }
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let mut x = s.session(&session)?.clone();
    check_revision(&headers, x.scoped_board.revision())?;
    let (assets, pipeline, count) = (s.assets.clone(), state.pipeline().clone(), req.count);
    let lane = format!("variations-{session}");
    let job = state.spawn_job(&s, JobKind::SlideVariation, &lane, Some(session), async move {
        pipeline.generate_slide_variations(&mut x, &assets, count).await?;
        Ok(VariationResult {
            session_id: x.session_id,
            variations: x.variations,
            violations: x.variation_violations,
        })
    })?;
    Ok(accepted(job))
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub enum ApplyMode {
    /// Replace only the session's slide.
    #[default]
    Slide,
    /// Replace the slide and restyle the whole deck from it.
    Deck,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApplyRequest {
    pub variation_index: usize,
    #[serde(default)]
    pub mode: ApplyMode,
}

pub async fn apply(
    State(state): State<AppState>,
    Path((board, session)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<ApplyRequest>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    let deck = s
        .deck
        .clone()
        .ok_or_else(|| ApiError::not_found("no deck has been generated"))?;
    check_revision(&headers, deck.revision)?;
    let x = s.session(&session)?;
    let next = match req.mode {
        ApplyMode::Slide => apply_variation(&deck, x, req.variation_index)?,
        ApplyMode::Deck => apply_style_to_deck(&deck, x, req.variation_index)?,
    };
    let violations = validate_deck(&next.to_json()).map_err(|e| ApiError::bad_input(e.to_string()))?;
    s.session_mut(&session)?.status = SessionStatus::Applied;
    s.deck = Some(next.clone());
    s.deck_violations = violations.clone();
    s.after_mutation(state.config().auto_previews);
    Ok(([(ETAG, etag(next.revision))], json_ok(&json!({ "deck": next, "violations": violations }))).into_response())
}
