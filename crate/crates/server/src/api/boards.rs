use axum::extract::{Path, State};
use axum::http::header::{CONTENT_TYPE, ETAG};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::json;
use tagdeck::artifacts::{render_deck_annotated, Outline};
use tagdeck::board::{GroupName, Position, TagId};
use tagdeck::demo;
use tagdeck::ingest::{select_sections as select_doc_sections, AssetStore};
use tagdeck::pipeline::{apply_grounded, outline_id, JobKind};
use tagdeck::TagBoard;

use super::{accepted, board_value, check_revision, etag, json_ok, mutation, ApiJson, OptJson};
use crate::error::ApiError;
use crate::state::{AppState, SuggestionResult};

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateBoard {
    pub board_id: Option<String>,
    /// Seed with a bundled scenario: yoga, kayaking, style or tesla.
    pub demo: Option<String>,
}

pub async fn list(State(state): State<AppState>) -> Result<Response, ApiError> {
    let mut out = Vec::new();
    for id in state.board_ids() {
        let shared = state.board(&id)?;
        let s = shared.lock().await;
        out.push(json!({
            "boardId": id,
            "boardRevision": s.board.revision(),
            "tagCount": s.board.tags().len(),
        }));
    }
    Ok(Json(out).into_response())
}

pub async fn create(State(state): State<AppState>, OptJson(req): OptJson<CreateBoard>) -> Result<Response, ApiError> {
    let (mut board, assets) = match req.demo.as_deref() {
        None => (TagBoard::new(""), AssetStore::new()),
        Some("yoga") => (demo::yoga_board(), AssetStore::new()),
        Some("kayaking") => (demo::kayaking_board(), AssetStore::new()),
        Some("style") => (demo::style_board(), AssetStore::new()),
        Some("tesla") => demo::tesla_workspace()?,
        Some(other) => return Err(ApiError::bad_input(format!("unknown demo {other:?}"))),
    };
    board.board_id = match req.board_id {
        Some(id) if id.trim().is_empty() => return Err(ApiError::bad_input("boardId must not be empty")),
        Some(id) => id,
        None if req.demo.is_some() && state.board(&board.board_id).is_err() => board.board_id.clone(),
        None => state.fresh_board_id(),
    };
    let session = state.new_session(board, assets);
    let shared = state.insert_board(session, false)?;
    let s = shared.lock().await;
    Ok((
        StatusCode::CREATED,
        [(ETAG, etag(s.board.revision()))],
        Json(board_value(&s.board)),
    )
        .into_response())
}

pub async fn get_board(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    Ok(([(ETAG, etag(s.board.revision()))], Json(board_value(&s.board))).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateTag {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub value: String,
    pub group: Option<GroupName>,
    pub position: Option<Position>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EditTag {
    #[serde(default)]
    pub label: String,
    pub value: String,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveTag {
    pub position: Option<Position>,
    pub group: Option<GroupName>,
}

/// Placement for a new or moved tag. A position decides the group by hit
/// test; a group without a position places the tag inside that group.
fn placement(board: &TagBoard, position: Option<Position>, group: Option<GroupName>) -> Result<(Position, Option<GroupName>), ApiError> {
    match (position, group) {
        (Some(p), g) => {
            let hit = board.group_at(&p);
            if g.is_some() && g != hit {
                return Err(ApiError::bad_input(format!(
                    "position ({}, {}) is not inside {}",
                    p.x,
                    p.y,
                    g.map(|g| g.to_string()).unwrap_or_default()
                )));
            }
            Ok((p, hit))
        }
        (None, Some(g)) => {
            let n = board.tags().iter().filter(|t| t.group == Some(g)).count();
            Ok((board.inside_position(g, n, n + 1), Some(g)))
        }
        (None, None) => {
            let n = board.tags().iter().filter(|t| t.group.is_none()).count();
            Ok((board.float_position(GroupName::Narrative, n, n + 1), None))
        }
    }
}

pub fn apply_create(board: &mut TagBoard, req: &CreateTag) -> Result<TagId, ApiError> {
    let (position, group) = placement(board, req.position, req.group)?;
    Ok(board.create_tag(&req.label, &req.value, group, position)?.id.clone())
}

pub fn apply_move(board: &mut TagBoard, tag: &TagId, req: &MoveTag) -> Result<(), ApiError> {
    if req.position.is_none() && req.group.is_none() {
        return Err(ApiError::bad_input("move needs a position or a group"));
    }
    board.tag(tag)?;
    let (position, group) = placement(board, req.position, req.group)?;
    board.move_tag(tag, position, group)?;
    Ok(())
}

pub async fn create_tag(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<CreateTag>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let id = apply_create(&mut s.board, &req)?;
    s.after_mutation(state.config().auto_previews);
    let mut resp = mutation(&s.board, vec![id]);
    *resp.status_mut() = StatusCode::CREATED;
    Ok(resp)
}

pub async fn edit_tag(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<EditTag>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let id = TagId(tag);
    s.board.edit_tag(&id, &req.label, &req.value)?;
    s.after_mutation(state.config().auto_previews);
    Ok(mutation(&s.board, vec![id]))
}

pub async fn move_tag(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<MoveTag>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let id = TagId(tag);
    apply_move(&mut s.board, &id, &req)?;
    s.after_mutation(state.config().auto_previews);
    Ok(mutation(&s.board, vec![id]))
}

pub async fn delete_tag(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let id = TagId(tag);
    s.board.delete_tag(&id)?;
    s.after_mutation(state.config().auto_previews);
    Ok(mutation(&s.board, vec![id]))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Selection {
    /// `null` selects the whole document.
    pub section_ids: Option<Vec<String>>,
}

pub async fn select_sections(
    State(state): State<AppState>,
    Path((board, tag)): Path<(String, String)>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<Selection>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let id = TagId(tag);
    let s = &mut *s;
    match &req.section_ids {
        Some(ids) => select_doc_sections(&mut s.board, &s.assets, &id, ids)?,
        None => {
            s.board.set_selection(&id, None)?;
        }
    }
    s.after_mutation(state.config().auto_previews);
    Ok(mutation(&s.board, vec![id]))
}

#[derive(Debug, Deserialize)]
pub struct GroundText {
    pub text: String,
}

pub async fn ground_from_text(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<GroundText>,
) -> Result<Response, ApiError> {
    if req.text.trim().is_empty() {
        return Err(ApiError::bad_input("text must not be empty"));
    }
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let drafts = state.pipeline().text_grounding_drafts(&s.board, &req.text).await?;
    let ids = apply_grounded(&mut s.board, &drafts)?;
    s.after_mutation(state.config().auto_previews);
    Ok(mutation(&s.board, ids))
}

pub async fn suggestions(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let (b, assets, pipeline) = (s.board.clone(), s.assets.clone(), state.pipeline().clone());
    let job = state.spawn_job(&s, JobKind::Suggestions, "suggestions", None, async move {
        let drafts = pipeline.suggestion_drafts(&b, &assets).await?;
        Ok(SuggestionResult { drafts })
    })?;
    Ok(accepted(job))
}

pub async fn outline_job(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let (b, assets, pipeline) = (s.board.clone(), s.assets.clone(), state.pipeline().clone());
    let job = state.spawn_job(&s, JobKind::Outline, "outline", None, async move {
        Ok(pipeline.outline_reply(&b, &assets).await?)
    })?;
    Ok(accepted(job))
}

pub async fn get_outline(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let outline = s
        .outline
        .as_ref()
        .ok_or_else(|| ApiError::not_found("no outline has been generated"))?;
    Ok(([(ETAG, etag(outline.revision))], Json(outline)).into_response())
}

#[derive(Debug, Deserialize)]
pub struct OutlineText {
    pub markdown: String,
}

/// Manual outline edit. `If-Match` is checked against the outline revision.
pub async fn put_outline(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<OutlineText>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    let s = &mut *s;
    match &mut s.outline {
        Some(o) => {
            check_revision(&headers, o.revision)?;
            o.edit(req.markdown);
        }
        None => {
            check_revision(&headers, 0)?;
            let outline = Outline::from_markdown(outline_id(&s.board), req.markdown);
            s.board.link_outline(Some(outline.id.clone()));
            s.outline = Some(outline);
        }
    }
    let outline = s.outline.as_ref().expect("set above");
    Ok(([(ETAG, etag(outline.revision))], Json(outline)).into_response())
}

#[derive(Debug, Default, Deserialize)]
pub struct DeckRequest {
    /// Outline markdown; defaults to the board's current outline.
    pub outline: Option<String>,
}

pub async fn deck_job(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    OptJson(req): OptJson<DeckRequest>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let outline = match req.outline {
        Some(md) => md,
        None => s
            .outline
            .as_ref()
            .map(|o| o.markdown.clone())
            .ok_or_else(|| ApiError::bad_input("generate or provide an outline first"))?,
    };
    let template = s.assets.active_template(&s.board).cloned();
    let (b, assets, pipeline) = (s.board.clone(), s.assets.clone(), state.pipeline().clone());
    let job = state.spawn_job(&s, JobKind::Deck, "deck", None, async move {
        Ok(pipeline.deck_reply(&b, &assets, &outline, template.as_ref()).await?)
    })?;
    Ok(accepted(job))
}

pub async fn get_deck(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let deck = s
        .deck
        .as_ref()
        .ok_or_else(|| ApiError::not_found("no deck has been generated"))?;
    let body = json!({ "deck": deck, "violations": s.deck_violations });
    Ok(([(ETAG, etag(deck.revision))], Json(body)).into_response())
}

pub async fn deck_html(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let deck = s
        .deck
        .as_ref()
        .ok_or_else(|| ApiError::not_found("no deck has been generated"))?;
    let html = render_deck_annotated(deck, &s.deck_violations);
    Ok(([(CONTENT_TYPE, "text/html; charset=utf-8")], html).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectSlide {
    pub slide_number: Option<u32>,
}

/// Chooses the slide previews are rendered on.
pub async fn select_slide(
    State(state): State<AppState>,
    Path(board): Path<String>,
    ApiJson(req): ApiJson<SelectSlide>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    if let Some(n) = req.slide_number {
        let exists = s.deck.as_ref().is_some_and(|d| d.slide(n).is_some());
        if !exists {
            return Err(ApiError::not_found(format!("slide {n} does not exist")));
        }
    }
    s.selected_slide = req.slide_number;
    Ok(json_ok(&json!({ "selectedSlide": s.selected_slide })))
}
