use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::json;
use tagdeck::project::{load_project, save_project, Project};

use super::{board_value, ApiQuery};
use crate::error::{ApiError, ErrorCode};
use crate::state::{AppState, BoardSession};

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn snapshot(s: &BoardSession, saved_at: u64) -> Project {
    Project {
        project_id: s.board.board_id.clone(),
        board: s.board.clone(),
        outline: s.outline.clone(),
        deck: s.deck.clone(),
        assets: s.assets.clone(),
        saved_at,
    }
}

/// The board as a project file.
pub async fn export(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let shared = state.board(&board)?;
    let s = shared.lock().await;
    let bytes = save_project(&snapshot(&s, now()));
    Ok(([(CONTENT_TYPE, "application/json")], bytes).into_response())
}

/// Writes the project file into the configured projects directory.
pub async fn save(State(state): State<AppState>, Path(board): Path<String>) -> Result<Response, ApiError> {
    let dir = state
        .config()
        .projects_dir
        .clone()
        .ok_or_else(|| ApiError::new(ErrorCode::Capability, "no projects directory configured (--projects-dir)"))?;
    let shared = state.board(&board)?;
    let bytes = {
        let s = shared.lock().await;
        save_project(&snapshot(&s, now()))
    };
    let safe: String = board
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let path = dir.join(format!("{safe}.json"));
    std::fs::create_dir_all(&dir)
        .and_then(|_| std::fs::write(&path, &bytes))
        .map_err(|e| ApiError::new(ErrorCode::BackendFailure, format!("could not write {}: {e}", path.display())))?;
    Ok(Json(json!({ "path": path, "bytes": bytes.len() })).into_response())
}

#[derive(Debug, Default, Deserialize)]
pub struct LoadQuery {
    #[serde(default)]
    pub replace: bool,
}

/// Opens a project file as a board. Unresolvable references come back as
/// warnings.
pub async fn load(
    State(state): State<AppState>,
    ApiQuery(q): ApiQuery<LoadQuery>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let (project, warnings) = load_project(&body)?;
    let mut session = state.new_session(project.board, project.assets);
    session.outline = project.outline;
    session.deck = project.deck;
    if let Some(deck) = &session.deck {
        session.deck_violations =
            tagdeck::artifacts::validate_deck(&deck.to_json()).map_err(|e| ApiError::bad_input(e.to_string()))?;
    }
    session.board.drain_events();
    let shared = state.insert_board(session, q.replace)?;
    let s = shared.lock().await;
    let body = json!({
        "boardId": s.board.board_id,
        "projectId": project.project_id,
        "warnings": warnings,
        "board": board_value(&s.board),
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}
