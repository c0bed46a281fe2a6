//! Project files: board, outline, deck and assets in one JSON document.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::artifacts::{Outline, SlideDeck};
use crate::board::{deserialize_board, serialize_board, BoardError, DanglingReference, TagBoard};
use crate::ingest::AssetStore;

pub const PROJECT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectError {
    #[error("malformed project file: {0}")]
    Parse(String),
    #[error("project schema version {found} is not supported (this build reads version {PROJECT_SCHEMA_VERSION})")]
    SchemaVersion { found: u64 },
    #[error(transparent)]
    Board(#[from] BoardError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    pub project_id: String,
    pub board: TagBoard,
    pub outline: Option<Outline>,
    pub deck: Option<SlideDeck>,
    pub assets: AssetStore,
    /// Seconds since the Unix epoch.
    pub saved_at: u64,
}

/// Something in a loaded project that does not resolve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ProjectWarning {
    #[serde(rename_all = "camelCase")]
    DanglingReference { tag_id: String, source: String },
    #[serde(rename_all = "camelCase")]
    MissingBlob { asset_id: String },
    #[serde(rename_all = "camelCase")]
    UnresolvedOutline { outline_ref: String },
    #[serde(rename_all = "camelCase")]
    UnresolvedDeck { deck_ref: String },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ProjectFile {
    schema_version: u32,
    project_id: String,
    saved_at: u64,
    board: Value,
    outline: Option<Outline>,
    deck: Option<SlideDeck>,
    assets: AssetStore,
}

pub fn save_project(project: &Project) -> Vec<u8> {
    let file = ProjectFile {
        schema_version: PROJECT_SCHEMA_VERSION,
        project_id: project.project_id.clone(),
        saved_at: project.saved_at,
        board: serde_json::from_slice(&serialize_board(&project.board)).expect("board JSON"),
        outline: project.outline.clone(),
        deck: project.deck.clone(),
        assets: project.assets.clone(),
    };
    serde_json::to_vec_pretty(&file).expect("project serializes")
}

/// Loads a project. Unresolvable references become warnings; the project
/// still opens.
pub fn load_project(bytes: &[u8]) -> Result<(Project, Vec<ProjectWarning>), ProjectError> {
    let raw: Value = serde_json::from_slice(bytes).map_err(|e| ProjectError::Parse(e.to_string()))?;
    let version = raw
        .get("schemaVersion")
        .and_then(Value::as_u64)
        .ok_or_else(|| ProjectError::Parse("missing schemaVersion".into()))?;
    if version != PROJECT_SCHEMA_VERSION as u64 {
        return Err(ProjectError::SchemaVersion { found: version });
    }
    let file: ProjectFile = serde_json::from_value(raw).map_err(|e| ProjectError::Parse(e.to_string()))?;
    let board = deserialize_board(file.board.to_string().as_bytes())?;
    let project = Project {
        project_id: file.project_id,
        board,
        outline: file.outline,
        deck: file.deck,
        assets: file.assets,
        saved_at: file.saved_at,
    };
    let warnings = project_warnings(&project);
    Ok((project, warnings))
}

pub fn project_warnings(project: &Project) -> Vec<ProjectWarning> {
    let mut out: Vec<ProjectWarning> = project
        .board
        .dangling_references(|id| project.assets.contains(id))
        .into_iter()
        .map(|DanglingReference { tag_id, source }| ProjectWarning::DanglingReference {
            tag_id: tag_id.0,
            source,
        })
        .collect();
    out.extend(
        project
            .assets
            .missing_blobs()
            .into_iter()
            .map(|asset_id| ProjectWarning::MissingBlob { asset_id }),
    );
    if let Some(r) = &project.board.outline_ref {
        if project.outline.as_ref().is_none_or(|o| &o.id != r) {
            out.push(ProjectWarning::UnresolvedOutline { outline_ref: r.clone() });
        }
    }
    if let Some(r) = &project.board.deck_ref {
        if project.deck.as_ref().is_none_or(|d| &d.deck_id != r) {
            out.push(ProjectWarning::UnresolvedDeck { deck_ref: r.clone() });
        }
    }
    out
}
