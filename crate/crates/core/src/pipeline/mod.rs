//! Generation flows: suggestions, outline, deck, grounding, slide variations
//! and style propagation.
//!
//! Model calls are split from board mutation. The `*_drafts` / `*_reply`
//! functions only read a board snapshot and talk to the backend; the
//! `apply_*` functions mutate. The combined helpers do both in sequence.

mod jobs;
mod raster;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifacts::{
    restyle_deck, single_slide_from_json, slide_outline, slides_from_json, validate_deck,
    ArtifactError, DeckTemplate, Outline, Slide, SlideDeck, Violation,
};
use crate::board::{BoardError, GroupName, TagBoard, TagId, TagOrigin};
use crate::ingest::AssetStore;
use crate::llm::{
    complete_json, parse_grounding, parse_suggestions, strip_code_fence, Buckets,
    CompletionBackend, CompletionRequest, LlmError,
};
use crate::prompts::{self, PromptError, SlideScope};

pub use jobs::{Job, JobError, JobFailure, JobKind, JobRegistry, JobStatus};
pub use raster::{parse_color, BlockRasterizer, Rasterizer};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("slide {0} does not exist")]
    NoSuchSlide(u32),
    #[error("variation {index} out of range ({len} available)")]
    Range { index: usize, len: usize },
    #[error("deck changed since the session was opened (expected revision {expected}, found {found})")]
    Conflict { expected: u64, found: u64 },
    #[error("{0}")]
    Capability(String),
}

impl PipelineError {
    pub fn raw_reply(&self) -> Option<&str> {
        match self {
            PipelineError::Llm(e) => e.raw_reply(),
            _ => None,
        }
    }
}

fn shape_with_raw(e: ArtifactError, raw: &str) -> PipelineError {
    PipelineError::Llm(LlmError::Shape {
        detail: e.to_string(),
        raw: Some(raw.to_string()),
    })
}

/// A tag proposed by the model, not yet on a board.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TagDraft {
    pub group: GroupName,
    pub label: String,
    pub value: String,
}

/// Flattens buckets in group order, dropping repeats within the reply and
/// any `(label, value)` already active on `board`.
pub fn dedup_drafts(board: &TagBoard, buckets: &Buckets) -> Vec<TagDraft> {
    let mut seen: BTreeSet<(String, String)> = board
        .active_concepts()
        .map(|(_, c)| (c.label.clone(), c.value.clone()))
        .collect();
    let mut out = Vec::new();
    for (group, pairs) in buckets {
        for (label, value) in pairs {
            if seen.insert((label.clone(), value.clone())) {
                out.push(TagDraft {
                    group: *group,
                    label: label.clone(),
                    value: value.clone(),
                });
            }
        }
    }
    out
}

/// Places drafts as floating suggested tags, ringed around their groups.
pub fn apply_suggestions(board: &mut TagBoard, drafts: &[TagDraft]) -> Result<Vec<TagId>, BoardError> {
    place(board, drafts, false)
}

/// Places drafts as active grounded tags inside their groups.
pub fn apply_grounded(board: &mut TagBoard, drafts: &[TagDraft]) -> Result<Vec<TagId>, BoardError> {
    place(board, drafts, true)
}

fn place(board: &mut TagBoard, drafts: &[TagDraft], inside: bool) -> Result<Vec<TagId>, BoardError> {
    let mut ids = Vec::with_capacity(drafts.len());
    for group in GroupName::ALL {
        let mine: Vec<&TagDraft> = drafts.iter().filter(|d| d.group == group).collect();
        let existing = board.tags().iter().filter(|t| t.group == Some(group)).count();
        for (i, d) in mine.iter().enumerate() {
            let (position, target, origin) = if inside {
                let slots = existing + mine.len();
                (board.inside_position(group, existing + i, slots), Some(group), TagOrigin::Grounded)
            } else {
                (board.float_position(group, i, mine.len()), None, TagOrigin::Suggested)
            };
            let tag = board.create_tag_with_origin(&d.label, &d.value, target, position, origin)?;
            ids.push(tag.id.clone());
        }
    }
    Ok(ids)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeckResult {
    pub deck: SlideDeck,
    /// Schema violations found in the reply. Reported, not repaired.
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GroundingMode {
    Image,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SessionStatus {
    Grounded,
    VariationsReady,
    Applied,
}

/// Steering state for one slide. Its board is isolated: board-level tags are
/// not carried over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScopedSlideSession {
    pub session_id: String,
    pub parent_deck_id: String,
    pub parent_deck_revision: u64,
    pub slide_number: u32,
    pub source_slide: Slide,
    #[serde(with = "board_json")]
    pub scoped_board: TagBoard,
    pub grounding_mode: GroundingMode,
    /// Buckets whose grounded count fell outside 2..=6.
    pub out_of_range: Vec<GroupName>,
    pub variations: Vec<Slide>,
    pub variation_violations: Vec<Vec<Violation>>,
    pub status: SessionStatus,
}

mod board_json {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    use crate::board::{deserialize_board, serialize_board, TagBoard};

    pub fn serialize<S: Serializer>(b: &TagBoard, s: S) -> Result<S::Ok, S::Error> {
        let v: Value = serde_json::from_slice(&serialize_board(b)).expect("board JSON");
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TagBoard, D::Error> {
        let v = Value::deserialize(d)?;
        deserialize_board(v.to_string().as_bytes()).map_err(D::Error::custom)
    }
}

#[derive(Clone)]
pub struct PipelineConfig {
    /// Used for image-mode slide grounding when present.
    pub rasterizer: Option<Arc<dyn Rasterizer>>,
    /// Ground from slide JSON text when no image can be produced.
    pub text_fallback: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rasterizer: None,
            text_fallback: true,
        }
    }
}

/// Runs generation flows against one completion backend.
#[derive(Clone)]
pub struct Pipeline {
    backend: Arc<dyn CompletionBackend>,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(backend: Arc<dyn CompletionBackend>) -> Self {
        Self::with_config(backend, PipelineConfig::default())
    }

    pub fn with_config(backend: Arc<dyn CompletionBackend>, config: PipelineConfig) -> Self {
        Self { backend, config }
    }

    pub fn backend(&self) -> &Arc<dyn CompletionBackend> {
        &self.backend
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    async fn json(&self, bundle: prompts::PromptBundle) -> Result<(serde_json::Value, String), PipelineError> {
        let request = CompletionRequest::from(bundle);
        let (value, raw) = complete_json(self.backend.as_ref(), &request).await?;
        Ok((value, raw.text))
    }

    fn with_raw<T>(r: Result<T, LlmError>, raw: &str) -> Result<T, PipelineError> {
        r.map_err(|e| match e {
            LlmError::Shape { detail, raw: None } => LlmError::Shape {
                detail,
                raw: Some(raw.to_string()),
            }
            .into(),
            other => other.into(),
        })
    }

    /// Suggestions for `board`, deduplicated against its active tags.
    pub async fn suggestion_drafts(&self, board: &TagBoard, assets: &AssetStore) -> Result<Vec<TagDraft>, PipelineError> {
        let (value, raw) = self.json(prompts::build_suggestion_prompt(board, assets)?).await?;
        let buckets = Self::with_raw(parse_suggestions(&value), &raw)?;
        Ok(dedup_drafts(board, &buckets))
    }

    /// Requests suggestions and adds them as floating tags.
    pub async fn request_suggestions(&self, board: &mut TagBoard, assets: &AssetStore) -> Result<Vec<TagId>, PipelineError> {
        let drafts = self.suggestion_drafts(board, assets).await?;
        Ok(apply_suggestions(board, &drafts)?)
    }

    /// Outline markdown for `board`. Does not link it.
    pub async fn outline_reply(&self, board: &TagBoard, assets: &AssetStore) -> Result<Outline, PipelineError> {
        let request = CompletionRequest::from(prompts::build_outline_prompt(board, assets)?);
        let raw = self.backend.complete(&request).await?;
        let markdown = strip_code_fence(&raw.text);
        if markdown.is_empty() {
            return Err(LlmError::Shape {
                detail: "outline reply is empty".into(),
                raw: Some(raw.text),
            }
            .into());
        }
        Ok(Outline::from_markdown(outline_id(board), format!("{markdown}\n")))
    }

    /// Generates an outline and links it to the board.
    pub async fn generate_outline(&self, board: &mut TagBoard, assets: &AssetStore) -> Result<Outline, PipelineError> {
        let outline = self.outline_reply(board, assets).await?;
        board.link_outline(Some(outline.id.clone()));
        Ok(outline)
    }

    /// Deck for `outline`. `template` defaults to nothing; pass
    /// `assets.active_template(board)` to honor a template reference.
    pub async fn deck_reply(
        &self,
        board: &TagBoard,
        assets: &AssetStore,
        outline: &str,
        template: Option<&DeckTemplate>,
    ) -> Result<DeckResult, PipelineError> {
        let (value, raw) = self
            .json(prompts::build_deck_prompt(outline, board, assets, template)?)
            .await?;
        let violations = validate_deck(&value).map_err(|e| shape_with_raw(e, &raw))?;
        let slides = slides_from_json(&value).map_err(|e| shape_with_raw(e, &raw))?;
        Ok(DeckResult {
            deck: SlideDeck::new(deck_id(board), slides),
            violations,
        })
    }

    /// Generates a deck using the board's active template and links it.
    pub async fn generate_deck(&self, board: &mut TagBoard, assets: &AssetStore, outline: &str) -> Result<DeckResult, PipelineError> {
        let result = self
            .deck_reply(board, assets, outline, assets.active_template(board))
            .await?;
        board.link_deck(Some(result.deck.deck_id.clone()));
        Ok(result)
    }

    pub async fn text_grounding_drafts(&self, board: &TagBoard, free_text: &str) -> Result<Vec<TagDraft>, PipelineError> {
        let (value, raw) = self.json(prompts::build_text_grounding_prompt(free_text)?).await?;
        let buckets = Self::with_raw(parse_suggestions(&value), &raw)?;
        Ok(dedup_drafts(board, &buckets))
    }

    /// Decomposes free text into active tags placed inside their groups.
    pub async fn ground_from_text(&self, board: &mut TagBoard, free_text: &str) -> Result<Vec<TagId>, PipelineError> {
        let drafts = self.text_grounding_drafts(board, free_text).await?;
        Ok(apply_grounded(board, &drafts)?)
    }

    fn grounding_bundle(&self, slide: &Slide) -> Result<(prompts::PromptBundle, GroundingMode), PipelineError> {
        if let Some(r) = &self.config.rasterizer {
            match r.rasterize(slide) {
                Ok(png) => return Ok((prompts::build_slide_grounding_prompt(&png)?, GroundingMode::Image)),
                Err(e) if self.config.text_fallback => {
                    tracing::warn!(error = %e, "rasterizer failed, grounding from slide JSON");
                }
                Err(e) => return Err(PipelineError::Capability(format!("slide rasterization failed: {e}"))),
            }
        } else if !self.config.text_fallback {
            return Err(PipelineError::Capability(
                "no slide rasterizer configured and JSON fallback is disabled".into(),
            ));
        }
        Ok((prompts::build_slide_grounding_text_prompt(slide)?, GroundingMode::Text))
    }

    /// Grounds one slide into a fresh scoped board.
    pub async fn open_slide_session(&self, deck: &SlideDeck, slide_number: u32) -> Result<ScopedSlideSession, PipelineError> {
        let slide = deck
            .slide(slide_number)
            .ok_or(PipelineError::NoSuchSlide(slide_number))?
            .clone();
        let (bundle, mode) = self.grounding_bundle(&slide)?;
        let (value, raw) = self.json(bundle).await?;
        let parsed = Self::with_raw(parse_grounding(&value), &raw)?;
        let session_id = format!("{}-slide-{}", deck.deck_id, slide_number);
        let mut scoped = TagBoard::new(session_id.clone());
        let drafts = dedup_drafts(&scoped, &parsed.buckets);
        apply_grounded(&mut scoped, &drafts)?;
        scoped.drain_events();
        Ok(ScopedSlideSession {
            session_id,
            parent_deck_id: deck.deck_id.clone(),
            parent_deck_revision: deck.revision,
            slide_number,
            source_slide: slide,
            scoped_board: scoped,
            grounding_mode: mode,
            out_of_range: parsed.out_of_range,
            variations: Vec::new(),
            variation_violations: Vec::new(),
            status: SessionStatus::Grounded,
        })
    }

    /// One single-slide generation for the session's slide under `board`.
    pub async fn scoped_slide(
        &self,
        source: &Slide,
        board: &TagBoard,
        assets: &AssetStore,
        template: Option<&DeckTemplate>,
        variation: Option<(u32, u32)>,
    ) -> Result<(Slide, Vec<Violation>), PipelineError> {
        let scope = SlideScope {
            slide_number: source.slide_number,
            variation,
        };
        let bundle = prompts::build_single_slide_prompt(&slide_outline(source), board, assets, template, scope)?;
        let (value, raw) = self.json(bundle).await?;
        single_slide_from_json(&value, source.slide_number).map_err(|e| shape_with_raw(e, &raw))
    }

    /// Replaces the session's variations with `count` new ones.
    pub async fn generate_slide_variations(
        &self,
        session: &mut ScopedSlideSession,
        assets: &AssetStore,
        count: u32,
    ) -> Result<Vec<Slide>, PipelineError> {
        let mut slides = Vec::new();
        let mut violations = Vec::new();
        for i in 1..=count {
            let variation = (count > 1).then_some((i, count));
            let (slide, v) = self
                .scoped_slide(&session.source_slide, &session.scoped_board, assets, None, variation)
                .await?;
            slides.push(slide);
            violations.push(v);
        }
        session.variations = slides.clone();
        session.variation_violations = violations;
        session.status = SessionStatus::VariationsReady;
        Ok(slides)
    }
}

pub fn outline_id(board: &TagBoard) -> String {
    format!("outline-{}", board.board_id)
}

pub fn deck_id(board: &TagBoard) -> String {
    format!("deck-{}", board.board_id)
}

fn checked_variation<'a>(
    deck: &SlideDeck,
    session: &'a ScopedSlideSession,
    index: usize,
) -> Result<&'a Slide, PipelineError> {
    if deck.revision != session.parent_deck_revision || deck.deck_id != session.parent_deck_id {
        return Err(PipelineError::Conflict {
            expected: session.parent_deck_revision,
            found: deck.revision,
        });
    }
    session.variations.get(index).ok_or(PipelineError::Range {
        index,
        len: session.variations.len(),
    })
}

/// Replaces the session's slide with variation `index`.
pub fn apply_variation(deck: &SlideDeck, session: &ScopedSlideSession, index: usize) -> Result<SlideDeck, PipelineError> {
    let variation = checked_variation(deck, session, index)?;
    let mut next = deck.clone();
    let slot = next
        .slides
        .iter_mut()
        .find(|s| s.slide_number == session.slide_number)
        .ok_or(PipelineError::NoSuchSlide(session.slide_number))?;
    *slot = variation.clone();
    next.revision += 1;
    Ok(next)
}

/// Applies variation `index` and restyles the whole deck from it.
pub fn apply_style_to_deck(deck: &SlideDeck, session: &ScopedSlideSession, index: usize) -> Result<SlideDeck, PipelineError> {
    let replaced = apply_variation(deck, session, index)?;
    let variation = &session.variations[index];
    let mut restyled = restyle_deck(&replaced, variation);
    restyled.revision = deck.revision + 1;
    Ok(restyled)
}
