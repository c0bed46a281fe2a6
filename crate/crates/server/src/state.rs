use std::collections::{BTreeMap, HashMap};
use std::future::Future;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tagdeck::artifacts::{Outline, Slide, SlideDeck, Violation};
use tagdeck::board::BoardEvent;
use tagdeck::ingest::{apply_image_suggestions, AssetStore, ImageSuggester, ImageSuggestions};
use tagdeck::llm::CompletionBackend;
use tagdeck::pipeline::{
    apply_grounded, apply_suggestions, DeckResult, Job, JobKind, JobRegistry, Pipeline, ScopedSlideSession, SessionStatus, TagDraft,
};
use tagdeck::preview::{PreviewConfig, PreviewEngine, SlideContext};
use tagdeck::TagBoard;
use tokio::task::JoinHandle;

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub preview: PreviewConfig,
    /// Schedule previews for active tags after every board mutation.
    pub auto_previews: bool,
    /// Base URL uploaded images are served under.
    pub public_url: String,
    pub projects_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            preview: PreviewConfig::default(),
            auto_previews: false,
            public_url: "http://127.0.0.1:8080".into(),
            projects_dir: None,
        }
    }
}

/// Everything the service holds for one board.
pub struct BoardSession {
    pub board: TagBoard,
    pub assets: AssetStore,
    pub outline: Option<Outline>,
    pub deck: Option<SlideDeck>,
    pub deck_violations: Vec<Violation>,
    pub slide_sessions: BTreeMap<String, ScopedSlideSession>,
    pub previews: PreviewEngine,
    pub selected_slide: Option<u32>,
}

impl BoardSession {
    pub fn slide_context(&self) -> Option<SlideContext> {
        SlideContext::for_deck(self.deck.as_ref()?, self.selected_slide)
    }

    /// Forwards pending board events to the preview engine and optionally
    /// schedules fresh previews.
    pub fn after_mutation(&mut self, auto_previews: bool) {
        let events: Vec<BoardEvent> = self.board.drain_events();
        self.previews.handle_events(&events);
        if auto_previews {
            self.previews
                .auto_schedule(&self.board, &self.assets, self.slide_context());
        }
    }

    pub fn session(&self, id: &str) -> Result<&ScopedSlideSession, ApiError> {
        self.slide_sessions
            .get(id)
            .ok_or_else(|| ApiError::not_found(format!("slide session {id} not found")))
    }

    pub fn session_mut(&mut self, id: &str) -> Result<&mut ScopedSlideSession, ApiError> {
        self.slide_sessions
            .get_mut(id)
            .ok_or_else(|| ApiError::not_found(format!("slide session {id} not found")))
    }

    /// The revision a job of `kind` is checked against when it completes:
    /// the deck's for slide grounding, the scoped board's for variations,
    /// the board's otherwise.
    pub fn job_revision(&self, kind: JobKind, target: Option<&str>) -> u64 {
        match kind {
            JobKind::SlideGrounding => self.deck.as_ref().map_or(0, |d| d.revision),
            JobKind::SlideVariation => target
                .and_then(|s| self.slide_sessions.get(s))
                .map_or(0, |s| s.scoped_board.revision()),
            _ => self.board.revision(),
        }
    }
}

pub type SharedSession = Arc<tokio::sync::Mutex<BoardSession>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VariationResult {
    pub session_id: String,
    pub variations: Vec<Slide>,
    pub violations: Vec<Vec<Violation>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuggestionResult {
    pub drafts: Vec<TagDraft>,
}

struct Inner {
    config: ServiceConfig,
    backend: Arc<dyn CompletionBackend>,
    pipeline: Pipeline,
    images: ImageSuggester,
    boards: RwLock<BTreeMap<String, SharedSession>>,
    jobs: Mutex<JobRegistry>,
    handles: Mutex<HashMap<String, JoinHandle<()>>>,
    /// Job id to the session or slide it targets.
    targets: Mutex<HashMap<String, String>>,
    next_board: AtomicU64,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(pipeline: Pipeline, images: ImageSuggester, config: ServiceConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                backend: pipeline.backend().clone(),
                pipeline,
                images,
                config,
                boards: RwLock::new(BTreeMap::new()),
                jobs: Mutex::new(JobRegistry::new()),
                handles: Mutex::new(HashMap::new()),
                targets: Mutex::new(HashMap::new()),
                next_board: AtomicU64::new(0),
            }),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.inner.pipeline
    }

    pub fn backend(&self) -> &Arc<dyn CompletionBackend> {
        &self.inner.backend
    }

    pub fn images(&self) -> &ImageSuggester {
        &self.inner.images
    }

    pub fn new_session(&self, board: TagBoard, assets: AssetStore) -> BoardSession {
        BoardSession {
            board,
            assets,
            outline: None,
            deck: None,
            deck_violations: Vec::new(),
            slide_sessions: BTreeMap::new(),
            previews: PreviewEngine::new(self.inner.backend.clone(), self.inner.config.preview),
            selected_slide: None,
        }
    }

    pub fn fresh_board_id(&self) -> String {
        loop {
            let n = self.inner.next_board.fetch_add(1, Ordering::Relaxed) + 1;
            let id = format!("board-{n}");
            if !self.inner.boards.read().unwrap().contains_key(&id) {
                return id;
            }
        }
    }

    /// Registers a board session. Fails if the id is taken unless `replace`.
    pub fn insert_board(&self, session: BoardSession, replace: bool) -> Result<SharedSession, ApiError> {
        let id = session.board.board_id.clone();
        let mut boards = self.inner.boards.write().unwrap();
        if boards.contains_key(&id) && !replace {
            return Err(ApiError::conflict(format!("board {id} already exists")));
        }
        let shared = Arc::new(tokio::sync::Mutex::new(session));
        boards.insert(id, shared.clone());
        Ok(shared)
    }

    pub fn board(&self, id: &str) -> Result<SharedSession, ApiError> {
        self.inner
            .boards
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("board {id} not found")))
    }

    pub fn board_ids(&self) -> Vec<String> {
        self.inner.boards.read().unwrap().keys().cloned().collect()
    }

    pub fn job(&self, id: &str) -> Result<Job, ApiError> {
        Ok(self.inner.jobs.lock().unwrap().get(id)?.clone())
    }

    pub fn jobs(&self, board: Option<&str>) -> Vec<Job> {
        self.inner
            .jobs
            .lock()
            .unwrap()
            .jobs()
            .filter(|j| board.is_none_or(|b| j.board_id == b))
            .cloned()
            .collect()
    }

    pub fn job_target(&self, id: &str) -> Option<String> {
        self.inner.targets.lock().unwrap().get(id).cloned()
    }

    /// Registers a job on `lane` and runs `work` in the background. The
    /// caller holds the board lock, so the input revision is exact. A result
    /// that is still current when it arrives is applied to the board.
    pub fn spawn_job<T, F>(
        &self,
        session: &BoardSession,
        kind: JobKind,
        lane: &str,
        target: Option<String>,
        work: F,
    ) -> Result<Job, ApiError>
    where
        T: Serialize + Send + 'static,
        F: Future<Output = Result<T, ApiError>> + Send + 'static,
    {
        let board_id = session.board.board_id.clone();
        let revision = session.job_revision(kind, target.as_deref());
        let job_id = self
            .inner
            .jobs
            .lock()
            .unwrap()
            .start(kind, &board_id, lane, revision)?;
        if let Some(t) = target {
            self.inner.targets.lock().unwrap().insert(job_id.clone(), t);
        }
        let state = self.clone();
        let id = job_id.clone();
        let handle = tokio::spawn(async move {
            if !state.inner.jobs.lock().unwrap().mark_running(&id) {
                return;
            }
            let outcome = work.await;
            state.finish_job(&board_id, &id, outcome.map(|v| serde_json::to_value(v).expect("job results serialize"))).await;
        });
        if !handle.is_finished() {
            self.inner.handles.lock().unwrap().insert(job_id.clone(), handle);
        }
        self.job(&job_id)
    }

    async fn finish_job(&self, board_id: &str, job_id: &str, outcome: Result<Value, ApiError>) {
        self.inner.handles.lock().unwrap().remove(job_id);
        let Ok(shared) = self.board(board_id) else {
            self.inner.jobs.lock().unwrap().fail(job_id, ApiError::not_found("board was removed").to_failure());
            return;
        };
        let mut session = shared.lock().await;
        let value = match outcome {
            Ok(v) => v,
            Err(e) => {
                self.inner.jobs.lock().unwrap().fail(job_id, e.to_failure());
                return;
            }
        };
        let (kind, target) = {
            let jobs = self.inner.jobs.lock().unwrap();
            let Ok(job) = jobs.get(job_id) else { return };
            (job.kind, self.job_target(job_id))
        };
        let current = session.job_revision(kind, target.as_deref());
        let stale = {
            let mut jobs = self.inner.jobs.lock().unwrap();
            if !jobs.complete(job_id, value.clone(), current) {
                return;
            }
            jobs.get(job_id).map(|j| j.stale).unwrap_or(true)
        };
        if stale {
            tracing::info!(job_id, "job finished against an older revision; result kept, not applied");
            return;
        }
        match apply_result(&mut session, kind, target.as_deref(), &value) {
            Ok(_) => {
                self.inner.jobs.lock().unwrap().mark_applied(job_id);
                session.after_mutation(self.inner.config.auto_previews);
            }
            Err(e) => tracing::warn!(job_id, error = %e, "could not apply job result"),
        }
    }

    /// Cancels a queued or running job and stops its worker.
    pub fn cancel_job(&self, job_id: &str) -> Result<(Job, bool), ApiError> {
        let changed = self.inner.jobs.lock().unwrap().cancel(job_id)?;
        if changed {
            if let Some(h) = self.inner.handles.lock().unwrap().remove(job_id) {
                h.abort();
            }
        }
        Ok((self.job(job_id)?, changed))
    }

    /// Applies a finished job's result explicitly, stale or not.
    pub async fn apply_job(&self, job_id: &str) -> Result<Value, ApiError> {
        let job = self.job(job_id)?;
        let shared = self.board(&job.board_id)?;
        let mut session = shared.lock().await;
        let job = self.inner.jobs.lock().unwrap().result(job_id)?.clone();
        if job.applied {
            return Err(ApiError::conflict(format!("job {job_id} was already applied")));
        }
        let value = job.result.clone().unwrap_or(Value::Null);
        let target = self.job_target(job_id);
        let out = apply_result(&mut session, job.kind, target.as_deref(), &value)?;
        self.inner.jobs.lock().unwrap().mark_applied(job_id);
        session.after_mutation(self.inner.config.auto_previews);
        Ok(out)
    }

    /// Waits for every running job to finish. Test and shutdown helper.
    pub async fn settle(&self) {
        loop {
            let pending: Vec<JoinHandle<()>> = {
                let mut handles = self.inner.handles.lock().unwrap();
                handles.drain().map(|(_, h)| h).collect()
            };
            if pending.is_empty() {
                return;
            }
            for h in pending {
                let _ = h.await;
            }
        }
    }
}

fn decode<T: for<'de> Deserialize<'de>>(value: &Value) -> Result<T, ApiError> {
    serde_json::from_value(value.clone()).map_err(|e| ApiError::bad_input(format!("job result is unreadable: {e}")))
}

/// Puts a job result onto the board. Returns what changed.
pub fn apply_result(
    session: &mut BoardSession,
    kind: JobKind,
    target: Option<&str>,
    value: &Value,
) -> Result<Value, ApiError> {
    match kind {
        JobKind::Suggestions | JobKind::TextGrounding => {
            let result: SuggestionResult = decode(value)?;
            let ids = if kind == JobKind::TextGrounding {
                apply_grounded(&mut session.board, &result.drafts)?
            } else {
                apply_suggestions(&mut session.board, &result.drafts)?
            };
            Ok(json!({ "tagIds": ids, "boardRevision": session.board.revision() }))
        }
        JobKind::Outline => {
            let outline: Outline = decode(value)?;
            session.board.link_outline(Some(outline.id.clone()));
            session.outline = Some(outline.clone());
            Ok(json!({ "outline": outline, "boardRevision": session.board.revision() }))
        }
        JobKind::Deck => {
            let result: DeckResult = decode(value)?;
            session.board.link_deck(Some(result.deck.deck_id.clone()));
            session.deck = Some(result.deck.clone());
            session.deck_violations = result.violations.clone();
            session.slide_sessions.clear();
            Ok(json!({ "deck": result.deck, "violations": result.violations, "boardRevision": session.board.revision() }))
        }
        JobKind::SlideGrounding => {
            let s: ScopedSlideSession = decode(value)?;
            let current = session.deck.as_ref().map(|d| (d.deck_id.clone(), d.revision));
            if current != Some((s.parent_deck_id.clone(), s.parent_deck_revision)) {
                return Err(ApiError::conflict("the deck changed since this slide was grounded"));
            }
            let id = s.session_id.clone();
            session.slide_sessions.insert(id.clone(), s);
            Ok(json!({ "sessionId": id }))
        }
        JobKind::SlideVariation => {
            let result: VariationResult = decode(value)?;
            let id = target.unwrap_or(&result.session_id);
            let s = session.session_mut(id)?;
            s.variations = result.variations;
            s.variation_violations = result.violations;
            s.status = SessionStatus::VariationsReady;
            Ok(json!({ "sessionId": id, "count": s.variations.len() }))
        }
        JobKind::ImageSearch => {
            let found: ImageSuggestions = decode(value)?;
            let ids = apply_image_suggestions(&mut session.board, &mut session.assets, &found)?;
            Ok(json!({ "tagIds": ids, "warning": found.warning, "boardRevision": session.board.revision() }))
        }
    }
}
