//! Background pre-generation of per-tag widget data: alternative values for
//! the drop-down, the five-step opposite slider, and slide previews with a
//! tag value swapped in.

mod cache;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use tokio::task::JoinHandle;

use crate::artifacts::{render_slide, single_slide_from_json, slide_outline, Slide, SlideDeck, Violation};
use crate::board::{BoardError, BoardEvent, Tag, TagBoard, TagId};
use crate::ingest::AssetStore;
use crate::llm::{complete_json, CompletionBackend, CompletionRequest, LlmError};
use crate::prompts::{self, PromptError, SlideScope};

pub use cache::{Begin, CacheMetrics, Lookup, PreviewCache, PreviewKind};

pub const SLIDER_STEPS: usize = 5;
pub const MIN_ALTERNATIVES: usize = 4;
pub const MAX_ALTERNATIVES: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreviewError {
    #[error("tag {0} is unknown to the preview engine")]
    UnknownTag(TagId),
    #[error("tag {0} is not active")]
    InactiveTag(TagId),
    #[error("tag {0} is not a concept tag")]
    NotAConcept(TagId),
    #[error("preview unavailable: {0}")]
    Unavailable(String),
    #[error("slider step {0} is out of range (0..=4)")]
    StepRange(usize),
    #[error("slider was computed for tag revision {spec}, tag is now at {current}")]
    Stale { spec: u64, current: u64 },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Board(#[from] BoardError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SliderStep {
    pub value: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SliderSpec {
    pub tag_id: TagId,
    pub tag_revision: u64,
    pub left_value: String,
    pub right_value: String,
    /// Always five; the first holds the tag's value, the last the opposite.
    pub steps: Vec<SliderStep>,
    pub current_step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlternativeSet {
    pub tag_id: TagId,
    pub tag_revision: u64,
    pub options: Vec<String>,
    /// Option → preview id. `None` when there was no slide to preview on or
    /// the preview failed.
    pub previews: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PreviewPayload {
    Alternatives(AlternativeSet),
    Slider(SliderSpec),
}

/// The slide previews are rendered on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlideContext {
    pub deck_id: String,
    pub deck_revision: u64,
    pub slide: Slide,
}

impl SlideContext {
    /// The selected slide if given, else the first slide.
    pub fn for_deck(deck: &SlideDeck, selected: Option<u32>) -> Option<Self> {
        let slide = match selected {
            Some(n) => deck.slide(n)?,
            None => deck.slides.first()?,
        };
        Some(Self {
            deck_id: deck.deck_id.clone(),
            deck_revision: deck.revision,
            slide: slide.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PreviewArtifact {
    pub preview_id: String,
    pub tag_id: TagId,
    pub value: String,
    pub slide: Slide,
    pub violations: Vec<Violation>,
    pub html: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PreviewConfig {
    /// Alternatives requested per tag, clamped to 4..=6.
    pub alternatives: usize,
    /// Active tags auto-scheduled by [`PreviewEngine::auto_schedule`].
    pub budget: usize,
}

impl Default for PreviewConfig {
    fn default() -> Self {
        Self {
            alternatives: 5,
            budget: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EngineMetrics {
    #[serde(flatten)]
    pub cache: CacheMetrics,
    pub value_hits: u64,
    pub value_misses: u64,
    pub in_flight: usize,
}

/// Reads `{"oppositeValue": ..., "steps": [{value, description} x5]}`.
/// Endpoints are anchored to the tag's value and the opposite value.
pub fn parse_slider(json: &Value, tag: &Tag) -> Result<SliderSpec, LlmError> {
    let concept = tag
        .concept()
        .ok_or_else(|| LlmError::shape("slider requested for a non-concept tag"))?;
    let steps = json
        .get("steps")
        .and_then(Value::as_array)
        .ok_or_else(|| LlmError::shape("slider reply has no steps list"))?;
    if steps.len() != SLIDER_STEPS {
        return Err(LlmError::shape(format!(
            "slider reply has {} steps, expected {SLIDER_STEPS}",
            steps.len()
        )));
    }
    let mut parsed = steps
        .iter()
        .map(|s| {
            let field = |k: &str| s.get(k).and_then(Value::as_str).map(str::trim).map(str::to_string);
            match (field("value"), field("description")) {
                (Some(value), Some(description)) => Ok(SliderStep { value, description }),
                _ => Err(LlmError::shape("slider step needs a value and a description")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let right = json
        .get("oppositeValue")
        .and_then(Value::as_str)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .unwrap_or_else(|| parsed[SLIDER_STEPS - 1].value.clone());
    parsed[0].value = concept.value.clone();
    parsed[SLIDER_STEPS - 1].value = right.clone();
    Ok(SliderSpec {
        tag_id: tag.id.clone(),
        tag_revision: tag.revision,
        left_value: concept.value.clone(),
        right_value: right,
        steps: parsed,
        current_step: 0,
    })
}

/// Reads `{"alternatives": [...]}`, dropping blanks, repeats and the
/// current value, keeping at most `max`.
pub fn parse_alternatives(json: &Value, current: &str, max: usize) -> Result<Vec<String>, LlmError> {
    let list = json
        .get("alternatives")
        .or_else(|| json.as_array().map(|_| json))
        .and_then(Value::as_array)
        .ok_or_else(|| LlmError::shape("alternatives reply has no list"))?;
    let mut out: Vec<String> = Vec::new();
    for item in list {
        let s = item
            .as_str()
            .ok_or_else(|| LlmError::shape("alternative is not a string"))?
            .trim();
        let dup = out.iter().any(|o| o.eq_ignore_ascii_case(s));
        if !s.is_empty() && !s.eq_ignore_ascii_case(current.trim()) && !dup {
            out.push(s.to_string());
        }
    }
    if out.is_empty() {
        return Err(LlmError::shape("no usable alternatives in reply"));
    }
    out.truncate(max);
    Ok(out)
}

/// Sets the tag's value to the chosen slider step.
pub fn commit_slider_step<'b>(board: &'b mut TagBoard, spec: &SliderSpec, step: usize) -> Result<&'b Tag, PreviewError> {
    let chosen = spec.steps.get(step).ok_or(PreviewError::StepRange(step))?;
    let tag = board.tag(&spec.tag_id)?;
    if tag.revision != spec.tag_revision {
        return Err(PreviewError::Stale {
            spec: spec.tag_revision,
            current: tag.revision,
        });
    }
    let label = tag
        .concept()
        .ok_or_else(|| PreviewError::NotAConcept(spec.tag_id.clone()))?
        .label
        .clone();
    Ok(board.edit_tag(&spec.tag_id, &label, &chosen.value)?)
}

/// The single-slide request behind a value preview: the context slide
/// regenerated with the tag's value replaced by `value`.
pub fn preview_request(
    tag_id: &TagId,
    value: &str,
    board: &TagBoard,
    assets: &AssetStore,
    ctx: &SlideContext,
) -> Result<CompletionRequest, PreviewError> {
    let tag = board.tag(tag_id)?;
    let label = tag
        .concept()
        .ok_or_else(|| PreviewError::NotAConcept(tag_id.clone()))?
        .label
        .clone();
    let mut overridden = board.clone();
    overridden.edit_tag(tag_id, &label, value)?;
    let scope = SlideScope {
        slide_number: ctx.slide.slide_number,
        variation: None,
    };
    let bundle = prompts::build_single_slide_prompt(
        &slide_outline(&ctx.slide),
        &overridden,
        assets,
        assets.active_template(&overridden),
        scope,
    )?;
    Ok(CompletionRequest::from(bundle))
}

fn active_concept(board: &TagBoard, tag_id: &TagId) -> Result<Tag, PreviewError> {
    let tag = board.tag(tag_id)?;
    if tag.concept().is_none() {
        return Err(PreviewError::NotAConcept(tag_id.clone()));
    }
    if !tag.is_active() {
        return Err(PreviewError::InactiveTag(tag_id.clone()));
    }
    Ok(tag.clone())
}

struct Inner {
    backend: Arc<dyn CompletionBackend>,
    config: PreviewConfig,
    cache: Mutex<PreviewCache<PreviewPayload>>,
    handles: Mutex<HashMap<String, JoinHandle<()>>>,
    /// Request hash → artifact.
    artifacts: Mutex<HashMap<String, PreviewArtifact>>,
    value_hits: Mutex<(u64, u64)>,
}

/// Schedules preview jobs on the tokio runtime and serves their results.
/// Cheap to clone; clones share state.
#[derive(Clone)]
pub struct PreviewEngine {
    inner: Arc<Inner>,
}

impl PreviewEngine {
    pub fn new(backend: Arc<dyn CompletionBackend>, config: PreviewConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                backend,
                config: PreviewConfig {
                    alternatives: config.alternatives.clamp(MIN_ALTERNATIVES, MAX_ALTERNATIVES),
                    ..config
                },
                cache: Mutex::new(PreviewCache::new()),
                handles: Mutex::new(HashMap::new()),
                artifacts: Mutex::new(HashMap::new()),
                value_hits: Mutex::new((0, 0)),
            }),
        }
    }

    pub fn config(&self) -> PreviewConfig {
        self.inner.config
    }

    fn abort(&self, job_ids: &[String]) {
        let mut handles = self.inner.handles.lock().unwrap();
        for id in job_ids {
            if let Some(h) = handles.remove(id) {
                h.abort();
            }
        }
    }

    /// Queues missing kinds for an active concept tag. Returns only newly
    /// started job ids; fresh entries and coalesced jobs add nothing.
    pub fn schedule(
        &self,
        tag_id: &TagId,
        board: &TagBoard,
        assets: &AssetStore,
        kinds: &[PreviewKind],
        context: Option<SlideContext>,
    ) -> Result<Vec<String>, PreviewError> {
        let tag = active_concept(board, tag_id)?;
        let mut started = Vec::new();
        for &kind in kinds {
            let (begin, cancelled) = self.inner.cache.lock().unwrap().begin(tag_id, kind, tag.revision);
            self.abort(&cancelled);
            let Begin::Started(job_id) = begin else { continue };
            let engine = self.clone();
            let (tag, board, assets, context, id) =
                (tag.clone(), board.clone(), assets.clone(), context.clone(), job_id.clone());
            let handle = tokio::spawn(async move {
                let outcome = engine
                    .compute(kind, &tag, &board, &assets, context.as_ref())
                    .await
                    .map_err(|e| e.to_string());
                engine.inner.cache.lock().unwrap().complete(&id, outcome);
                engine.inner.handles.lock().unwrap().remove(&id);
            });
            if !handle.is_finished() {
                self.inner.handles.lock().unwrap().insert(job_id.clone(), handle);
            }
            started.push(job_id);
        }
        Ok(started)
    }

    /// Schedules both kinds for the first `budget` active concept tags.
    pub fn auto_schedule(
        &self,
        board: &TagBoard,
        assets: &AssetStore,
        context: Option<SlideContext>,
    ) -> Vec<String> {
        let ids: Vec<TagId> = board
            .active_concepts()
            .take(self.inner.config.budget)
            .map(|(t, _)| t.id.clone())
            .collect();
        ids.iter()
            .flat_map(|id| {
                self.schedule(id, board, assets, &PreviewKind::ALL, context.clone())
                    .unwrap_or_default()
            })
            .collect()
    }

    async fn compute(
        &self,
        kind: PreviewKind,
        tag: &Tag,
        board: &TagBoard,
        assets: &AssetStore,
        context: Option<&SlideContext>,
    ) -> Result<PreviewPayload, PreviewError> {
        match kind {
            PreviewKind::Slider => {
                let request = CompletionRequest::from(prompts::build_slider_prompt(tag, board, assets)?);
                let (json, raw) = complete_json(self.inner.backend.as_ref(), &request).await?;
                let spec = parse_slider(&json, tag).map_err(|e| with_raw(e, &raw.text))?;
                Ok(PreviewPayload::Slider(spec))
            }
            PreviewKind::Alternatives => {
                let n = self.inner.config.alternatives;
                let request = CompletionRequest::from(prompts::build_alternatives_prompt(tag, board, assets, n)?);
                let (json, raw) = complete_json(self.inner.backend.as_ref(), &request).await?;
                let current = &tag.concept().expect("checked when scheduling").value;
                let options = parse_alternatives(&json, current, n).map_err(|e| with_raw(e, &raw.text))?;
                let mut previews = BTreeMap::new();
                for option in &options {
                    let preview = match context {
                        Some(ctx) => match self.preview_for_value(&tag.id, option, board, assets, Some(ctx)).await {
                            Ok(p) => Some(p.preview_id),
                            Err(e) => {
                                tracing::warn!(tag = %tag.id, option, error = %e, "preview failed");
                                None
                            }
                        },
                        None => None,
                    };
                    previews.insert(option.clone(), preview);
                }
                Ok(PreviewPayload::Alternatives(AlternativeSet {
                    tag_id: tag.id.clone(),
                    tag_revision: tag.revision,
                    options,
                    previews,
                }))
            }
        }
    }

    fn lookup(&self, tag_id: &TagId, kind: PreviewKind) -> Result<Lookup<PreviewPayload>, PreviewError> {
        self.inner
            .cache
            .lock()
            .unwrap()
            .get(tag_id, kind)
            .ok_or_else(|| PreviewError::UnknownTag(tag_id.clone()))
    }

    pub fn get_alternatives(&self, tag_id: &TagId) -> Result<Lookup<AlternativeSet>, PreviewError> {
        Ok(match self.lookup(tag_id, PreviewKind::Alternatives)? {
            Lookup::Fresh(PreviewPayload::Alternatives(a)) => Lookup::Fresh(a),
            Lookup::Fresh(_) => unreachable!("kinds are keyed separately"),
            Lookup::Failed(m) => Lookup::Failed(m),
            Lookup::Pending => Lookup::Pending,
        })
    }

    pub fn get_slider(&self, tag_id: &TagId) -> Result<Lookup<SliderSpec>, PreviewError> {
        Ok(match self.lookup(tag_id, PreviewKind::Slider)? {
            Lookup::Fresh(PreviewPayload::Slider(s)) => Lookup::Fresh(s),
            Lookup::Fresh(_) => unreachable!("kinds are keyed separately"),
            Lookup::Failed(m) => Lookup::Failed(m),
            Lookup::Pending => Lookup::Pending,
        })
    }

    /// Regenerates the context slide with the tag's value replaced by
    /// `value`. Memoized on the full request, so a changed slide or board
    /// produces a new preview.
    pub async fn preview_for_value(
        &self,
        tag_id: &TagId,
        value: &str,
        board: &TagBoard,
        assets: &AssetStore,
        context: Option<&SlideContext>,
    ) -> Result<PreviewArtifact, PreviewError> {
        let ctx = context.ok_or_else(|| PreviewError::Unavailable("no deck has been generated yet".into()))?;
        let request = preview_request(tag_id, value, board, assets, ctx)?;
        let key = request.canonical_hash();
        if let Some(hit) = self.inner.artifacts.lock().unwrap().get(&key) {
            self.inner.value_hits.lock().unwrap().0 += 1;
            return Ok(hit.clone());
        }
        self.inner.value_hits.lock().unwrap().1 += 1;
        let (json, raw) = complete_json(self.inner.backend.as_ref(), &request).await?;
        let (slide, violations) = single_slide_from_json(&json, ctx.slide.slide_number).map_err(|e| {
            LlmError::Shape {
                detail: e.to_string(),
                raw: Some(raw.text.clone()),
            }
        })?;
        let artifact = PreviewArtifact {
            preview_id: format!("pv-{}", &key[..16]),
            tag_id: tag_id.clone(),
            value: value.to_string(),
            html: render_slide(&slide),
            slide,
            violations,
        };
        self.inner
            .artifacts
            .lock()
            .unwrap()
            .insert(key, artifact.clone());
        Ok(artifact)
    }

    pub fn artifact(&self, preview_id: &str) -> Option<PreviewArtifact> {
        self.inner
            .artifacts
            .lock()
            .unwrap()
            .values()
            .find(|a| a.preview_id == preview_id)
            .cloned()
    }

    /// Marks everything for the tag stale and cancels its jobs. Returns the
    /// cancelled job ids.
    pub fn invalidate(&self, tag_id: &TagId) -> Vec<String> {
        let cancelled = self.inner.cache.lock().unwrap().invalidate(tag_id);
        self.abort(&cancelled);
        cancelled
    }

    /// Cancels and forgets the tag (used on deletion).
    pub fn cancel_for_tag(&self, tag_id: &TagId) -> Vec<String> {
        let cancelled = self.inner.cache.lock().unwrap().remove_tag(tag_id);
        self.abort(&cancelled);
        cancelled
    }

    /// Follows board mutations. Returns the cancelled job ids.
    pub fn handle_events(&self, events: &[BoardEvent]) -> Vec<String> {
        let mut cancelled = Vec::new();
        for e in events {
            match e {
                BoardEvent::TagChanged { tag_id, revision } => {
                    let ids = self.inner.cache.lock().unwrap().observe(tag_id, *revision);
                    self.abort(&ids);
                    cancelled.extend(ids);
                }
                BoardEvent::TagDeleted { tag_id } => cancelled.extend(self.cancel_for_tag(tag_id)),
            }
        }
        cancelled
    }

    pub fn in_flight(&self, tag_id: &TagId) -> Vec<String> {
        self.inner.cache.lock().unwrap().in_flight(tag_id)
    }

    pub fn metrics(&self) -> EngineMetrics {
        let cache = self.inner.cache.lock().unwrap();
        let (value_hits, value_misses) = *self.inner.value_hits.lock().unwrap();
        EngineMetrics {
            cache: cache.metrics(),
            value_hits,
            value_misses,
            in_flight: cache.in_flight_total(),
        }
    }

    /// Waits for every spawned job to finish or abort.
    pub async fn settle(&self) {
        loop {
            let batch: Vec<JoinHandle<()>> = {
                let mut h = self.inner.handles.lock().unwrap();
                h.drain().map(|(_, v)| v).collect()
            };
            if batch.is_empty() {
                break;
            }
            for h in batch {
                let _ = h.await;
            }
        }
    }
}

fn with_raw(e: LlmError, raw: &str) -> LlmError {
    match e {
        LlmError::Shape { detail, raw: None } => LlmError::Shape {
            detail,
            raw: Some(raw.to_string()),
        },
        other => other,
    }
}
