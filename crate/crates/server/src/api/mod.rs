//! Routes under `/api/v1`.

mod assets;
mod boards;
mod jobs;
mod previews;
mod projects;
mod sessions;

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Query, Request};
use axum::http::header::{ETAG, IF_MATCH};
use axum::http::request::Parts;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use tagdeck::board::{serialize_board, TagId};
use tagdeck::pipeline::Job;
use tagdeck::TagBoard;

use crate::error::ApiError;
use crate::state::AppState;

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/boards", get(boards::list).post(boards::create))
        .route("/boards/{board}", get(boards::get_board))
        .route("/boards/{board}/tags", post(boards::create_tag))
        .route("/boards/{board}/tags/{tag}", axum::routing::patch(boards::edit_tag).delete(boards::delete_tag))
        .route("/boards/{board}/tags/{tag}/move", post(boards::move_tag))
        .route("/boards/{board}/tags/{tag}/selection", put(boards::select_sections))
        .route("/boards/{board}/ground-from-text", post(boards::ground_from_text))
        .route("/boards/{board}/suggestions", post(boards::suggestions))
        .route("/boards/{board}/outline", get(boards::get_outline).put(boards::put_outline).post(boards::outline_job))
        .route("/boards/{board}/deck", get(boards::get_deck).post(boards::deck_job))
        .route("/boards/{board}/deck/html", get(boards::deck_html))
        .route("/boards/{board}/selected-slide", put(boards::select_slide))
        .route("/boards/{board}/image-suggestions", post(assets::image_suggestions))
        .route("/boards/{board}/assets", get(assets::list))
        .route("/boards/{board}/assets/documents", post(assets::upload_document))
        .route("/boards/{board}/assets/images", post(assets::upload_image))
        .route("/boards/{board}/assets/templates", post(assets::upload_template))
        .route("/boards/{board}/assets/{asset}", get(assets::get_asset))
        .route("/boards/{board}/assets/{asset}/blob", get(assets::blob))
        .route("/boards/{board}/slide-sessions", get(sessions::list).post(sessions::open))
        .route("/boards/{board}/slide-sessions/{session}", get(sessions::get_session))
        .route("/boards/{board}/slide-sessions/{session}/tags", post(sessions::create_tag))
        .route(
            "/boards/{board}/slide-sessions/{session}/tags/{tag}",
            axum::routing::patch(sessions::edit_tag).delete(sessions::delete_tag),
        )
        .route("/boards/{board}/slide-sessions/{session}/tags/{tag}/move", post(sessions::move_tag))
        .route("/boards/{board}/slide-sessions/{session}/variations", post(sessions::variations))
        .route("/boards/{board}/slide-sessions/{session}/apply", post(sessions::apply))
        .route("/boards/{board}/previews", post(previews::schedule))
        .route("/boards/{board}/previews/metrics", get(previews::metrics))
        .route("/boards/{board}/previews/{preview}", get(previews::artifact))
        .route("/boards/{board}/previews/{preview}/html", get(previews::artifact_html))
        .route("/boards/{board}/tags/{tag}/alternatives", get(previews::alternatives))
        .route("/boards/{board}/tags/{tag}/slider", get(previews::slider))
        .route("/boards/{board}/tags/{tag}/slider/commit", post(previews::commit_slider))
        .route("/boards/{board}/tags/{tag}/preview", post(previews::preview_value))
        .route("/boards/{board}/project", get(projects::export).post(projects::save))
        .route("/projects", post(projects::load))
        .route("/jobs", get(jobs::list))
        .route("/jobs/{job}", get(jobs::get_job))
        .route("/jobs/{job}/result", get(jobs::result))
        .route("/jobs/{job}/cancel", post(jobs::cancel))
        .route("/jobs/{job}/apply", post(jobs::apply))
        .fallback(not_found);
    Router::new()
        .nest("/api/v1", api)
        .fallback(not_found)
        .with_state(state)
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn health(axum::extract::State(state): axum::extract::State<AppState>) -> Json<Value> {
    Json(json!({
        "status": "ok",
        "backend": state.backend().mode(),
        "imageSearch": state.images().mode(),
        "version": env!("CARGO_PKG_VERSION"),
    }))
}

/// JSON body whose rejections are [`ApiError`]s.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        let Json(v) = Json::<T>::from_request(req, state).await?;
        Ok(Self(v))
    }
}

/// JSON body that may be absent; an empty body yields `T::default()`.
pub struct OptJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Default> FromRequest<S> for OptJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::bad_input(e.body_text()))?;
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Ok(Self(T::default()));
        }
        serde_json::from_slice(&bytes)
            .map(Self)
            .map_err(|e| ApiError::bad_input(format!("invalid JSON body: {e}")))
    }
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        let Query(v) = Query::<T>::from_request_parts(parts, state).await?;
        Ok(Self(v))
    }
}

/// The revision named by `If-Match`, if the header is present. Accepts
/// `7`, `"7"` and `W/"7"`.
pub fn if_match(headers: &HeaderMap) -> Result<Option<u64>, ApiError> {
    let Some(raw) = headers.get(IF_MATCH) else {
        return Ok(None);
    };
    let text = raw
        .to_str()
        .map_err(|_| ApiError::bad_input("If-Match is not text"))?
        .trim()
        .trim_start_matches("W/")
        .trim_matches('"');
    text.parse()
        .map(Some)
        .map_err(|_| ApiError::bad_input(format!("If-Match must be a revision number, got {text:?}")))
}

pub fn check_revision(headers: &HeaderMap, current: u64) -> Result<(), ApiError> {
    match if_match(headers)? {
        Some(expected) if expected != current => Err(ApiError::conflict(format!(
            "revision mismatch: request was made against {expected}, current is {current}"
        ))),
        _ => Ok(()),
    }
}

pub fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are a valid header")
}

pub fn board_value(board: &TagBoard) -> Value {
    serde_json::from_slice(&serialize_board(board)).expect("board JSON")
}

/// Response body of every board mutation.
pub fn mutation(board: &TagBoard, tag_ids: Vec<TagId>) -> Response {
    let body = json!({
        "boardRevision": board.revision(),
        "tagIds": tag_ids,
        "board": board_value(board),
    });
    ([(ETAG, etag(board.revision()))], Json(body)).into_response()
}

pub fn accepted(job: Job) -> Response {
    (StatusCode::ACCEPTED, Json(job)).into_response()
}

pub fn json_ok<T: Serialize>(v: &T) -> Response {
    Json(v).into_response()
}
