use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use super::{BackendMode, CompletionBackend, CompletionRequest, LlmError, RawCompletion};

/// Recorded responses: request hash to response text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReplayStore {
    entries: BTreeMap<String, String>,
}

impl ReplayStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let bytes = std::fs::read(path)
            .map_err(|e| LlmError::Store(format!("{}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, LlmError> {
        serde_json::from_slice(bytes).map_err(|e| LlmError::Store(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("store serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), LlmError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| LlmError::Store(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, hash: &str) -> Option<&str> {
        self.entries.get(hash).map(String::as_str)
    }

    pub fn insert(&mut self, hash: String, response: String) {
        self.entries.insert(hash, response);
    }

    /// Records `response` as the answer to `request`.
    pub fn insert_request(&mut self, request: &CompletionRequest, response: impl Into<String>) {
        self.insert(request.canonical_hash(), response.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds every entry of `other`, overwriting on collision.
    pub fn merge(&mut self, other: ReplayStore) {
        self.entries.extend(other.entries);
    }
}

/// Answers strictly from a [`ReplayStore`]; a miss names the request hash.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    store: Arc<ReplayStore>,
}

impl ReplayBackend {
    pub fn new(store: ReplayStore) -> Self {
        Self {
            store: Arc::new(store),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, LlmError> {
        Ok(Self::new(ReplayStore::load(path)?))
    }

    pub fn store(&self) -> &ReplayStore {
        &self.store
    }
}

#[async_trait]
impl CompletionBackend for ReplayBackend {
    async fn complete(&self, request: &CompletionRequest) -> Result<RawCompletion, LlmError> {
        let hash = request.canonical_hash();
        match self.store.get(&hash) {
            Some(text) => Ok(RawCompletion {
                text: text.to_string(),
                usage: None,
                latency: Duration::ZERO,
            }),
            None => Err(LlmError::MissingFixture {
                hash,
                purpose: request.purpose.as_str().to_string(),
            }),
        }
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Replay
    }
}

/// Calls through to another backend and persists every reply. Store writes
/// are serialized.
pub struct RecordBackend {
    inner: Arc<dyn CompletionBackend>,
    path: PathBuf,
    store: Mutex<ReplayStore>,
}

impl RecordBackend {
    /// Starts from the existing store at `path` when there is one.
    pub fn new(inner: Arc<dyn CompletionBackend>, path: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let path = path.into();
        let store = if path.exists() {
            ReplayStore::load(&path)?
        } else {
            ReplayStore::new()
        };
        Ok(Self {
            inner,
            path,
            store: Mutex::new(store),
        })
    }

    pub async fn snapshot(&self) -> ReplayStore {
        self.store.lock().await.clone()
    }
}

#[async_trait]
impl CompletionBackend for RecordBackend {
    async fn complete(&self, request: &CompletionRequest) -> Result<RawCompletion, LlmError> {
        let started = Instant::now();
        let mut reply = self.inner.complete(request).await?;
        reply.latency = started.elapsed();
        let mut store = self.store.lock().await;
        store.insert_request(request, reply.text.clone());
        store.save(&self.path)?;
        Ok(reply)
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Record
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::Purpose;

    fn req(user: &str) -> CompletionRequest {
        CompletionRequest {
            system_prompt: "s".into(),
            user_message: user.into(),
            image_attachments: vec![],
            purpose: Purpose::Outline,
            max_retries: 1,
        }
    }

    #[tokio::test]
    async fn replay_hit_and_miss() {
        let mut store = ReplayStore::new();
        store.insert_request(&req("a"), "## Stored\n- exactly  ");
        let backend = ReplayBackend::new(store);
        let one = backend.complete(&req("a")).await.unwrap();
        let two = backend.complete(&req("a")).await.unwrap();
        assert_eq!(one.text, "## Stored\n- exactly  ");
        assert_eq!(one.text, two.text);
        match backend.complete(&req("b")).await {
            Err(LlmError::MissingFixture { hash, purpose }) => {
                assert_eq!(hash, req("b").canonical_hash());
                assert_eq!(purpose, "outline");
            }
            other => panic!("{other:?}"),
        }
    }

    #[tokio::test]
    async fn record_persists_every_reply() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        let mut upstream = ReplayStore::new();
        upstream.insert_request(&req("a"), "A");
        upstream.insert_request(&req("b"), "B");
        let rec = RecordBackend::new(Arc::new(ReplayBackend::new(upstream.clone())), &path).unwrap();
        rec.complete(&req("a")).await.unwrap();
        rec.complete(&req("b")).await.unwrap();
        assert_eq!(ReplayStore::load(&path).unwrap(), upstream);
        assert!(rec.complete(&req("c")).await.is_err());
        assert_eq!(rec.snapshot().await.len(), 2);
    }
}
