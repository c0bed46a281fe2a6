use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::{json, Value};
use tagdeck::board::{GroupName, TagOrigin};
use tagdeck::ingest::{
    attach_document, attach_image, attach_template, import_deck_template, import_docx, import_image, Asset,
};
use tagdeck::pipeline::JobKind;

use super::{accepted, board_value, check_revision, ApiQuery};
use crate::error::ApiError;
use crate::state::{AppState, BoardSession};

#[derive(Debug, Deserialize)]
pub struct UploadQuery {
    /// Place the new reference inside this group; floating when absent.
    pub group: Option<GroupName>,
    pub filename: Option<String>,
    pub name: Option<String>,
}

fn summary(asset: &Asset) -> Value {
    match asset {
        Asset::Document(d) => json!({
            "assetId": d.doc_id,
            "kind": "document",
            "title": d.title,
            "sections": d.sections.iter().map(|s| json!({"sectionId": s.section_id, "heading": s.heading})).collect::<Vec<_>>(),
        }),
        Asset::Image(i) => json!({
            "assetId": i.asset_id,
            "kind": "image",
            "url": i.url,
            "width": i.width,
            "height": i.height,
            "sourceKind": i.source_kind,
        }),
        Asset::DeckTemplate(t) => json!({
            "assetId": t.asset_id,
            "kind": "deckTemplate",
            "name": t.name,
            "slides": t.template.deck.len(),
        }),
    }
}

fn placement(s: &BoardSession, group: Option<GroupName>) -> tagdeck::board::Position {
    match group {
        Some(g) => {
            let n = s.board.tags().iter().filter(|t| t.group == Some(g)).count();
            s.board.inside_position(g, n, n + 1)
        }
        None => s.board.float_position(GroupName::ContentSources, 0, 1),
    }
}

fn uploaded(s: &BoardSession, asset_id: &str, tag_id: &tagdeck::TagId) -> Response {
    let asset = s.assets.get(asset_id).map(summary);
    let body = json!({
        "asset": asset,
        "tagId": tag_id,
        "boardRevision": s.board.revision(),
        "board": board_value(&s.board),
    });
    (StatusCode::CREATED, Json(body)).into_response()
}

pub async fn upload_document(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<UploadQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let doc = import_docx(&body, q.filename.as_deref())?;
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let position = placement(&s, q.group);
    let s = &mut *s;
    let asset_id = doc.doc_id.clone();
    let tag = attach_document(&mut s.board, &mut s.assets, doc, q.group, position)?;
    s.after_mutation(state.config().auto_previews);
    Ok(uploaded(s, &asset_id, &tag))
}

pub async fn upload_image(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<UploadQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let mut image = import_image(&body, None)?;
    image.url = Some(format!(
        "{}/api/v1/boards/{board}/assets/{}/blob",
        state.config().public_url.trim_end_matches('/'),
        image.asset_id
    ));
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let position = placement(&s, q.group);
    let s = &mut *s;
    let asset_id = image.asset_id.clone();
    let tag = attach_image(&mut s.board, &mut s.assets, image, q.group, position, TagOrigin::User)?;
    s.after_mutation(state.config().auto_previews);
    Ok(uploaded(s, &asset_id, &tag))
}

/// Imports a deck template. It arrives floating; move it into Content
/// Sources to use it.
pub async fn upload_template(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<UploadQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let name = q.name.or(q.filename).unwrap_or_else(|| "template".into());
    let template = import_deck_template(&body, &name)?;
    let shared = state.board(&board)?;
    let mut s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let s = &mut *s;
    let asset_id = template.asset_id.clone();
    let tag = attach_template(&mut s.board, &mut s.assets, template)?;
    if let Some(g) = q.group {
        let n = s.board.tags().iter().filter(|t| t.group == Some(g)).count();
        let p = s.board.inside_position(g, n, n + 1);
        s.board.move_tag(&tag, p, Some(g))?;
    }
    s.after_mutation(state.config().auto_previews);
    Ok(uploaded(s, &asset_id, &tag))
}

pub async fn list(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let out: Vec<Value> = s.assets.iter().map(summary).collect();
    Ok(Json(out).into_response())
}

pub async fn get_asset(
    State(state): State<AppState>,
    Path((board, asset)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let a = s
        .assets
        .get(&asset)
        .ok_or_else(|| ApiError::not_found(format!("asset {asset} not found")))?;
    Ok(Json(a).into_response())
}

pub async fn blob(
    State(state): State<AppState>,
    Path((board, asset)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let image = s
        .assets
        .image(&asset)
        .ok_or_else(|| ApiError::not_found(format!("image {asset} not found")))?;
    let data = image
        .data
        .clone()
        .ok_or_else(|| ApiError::not_found(format!("image {asset} has no stored bytes")))?;
    let mime = image.mime.clone().unwrap_or_else(|| "application/octet-stream".into());
    Ok(([(CONTENT_TYPE, mime)], data).into_response())
}

/// Starts a background image search from the board's Narrative tags.
pub async fn image_suggestions(
    State(state): State<AppState>,
    Path(board): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    check_revision(&headers, s.board.revision())?;
    let b = s.board.clone();
    let st = state.clone();
    let job = state.spawn_job(&s, JobKind::ImageSearch, "images", None, async move {
        Ok(st.images().suggest(&b).await)
    })?;
    Ok(accepted(job))
}
