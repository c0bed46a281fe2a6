//! Chat-completion backends and model-reply parsing.
//!
//! Three backends share one trait: a live OpenAI-compatible client, a replay
//! backend that answers from recorded responses keyed by a canonical request
//! hash, and a record backend that calls through to live and persists every
//! reply.

mod live;
mod replay;

use std::collections::BTreeMap;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::board::{parse_attr_value, GroupName};
use crate::prompts::{ImageAttachment, PromptBundle, Purpose};

pub use live::{LiveConfig, OpenAiBackend, DEFAULT_ENDPOINT, DEFAULT_KEY_ENV, DEFAULT_MODEL};
pub use replay::{RecordBackend, ReplayBackend, ReplayStore};

/// Appended to the user message when a reply was not valid JSON.
pub const REPAIR_INSTRUCTION: &str = "Return only valid JSON.";
pub const DEFAULT_MAX_RETRIES: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("no recorded response for request {hash} ({purpose})")]
    MissingFixture { hash: String, purpose: String },
    #[error("model reply is not valid JSON")]
    MalformedReply { raw: String },
    #[error("model reply has the wrong shape: {detail}")]
    Shape { detail: String, raw: Option<String> },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("replay store: {0}")]
    Store(String),
}

impl LlmError {
    /// The raw model text attached to the error, if any.
    pub fn raw_reply(&self) -> Option<&str> {
        match self {
            LlmError::MalformedReply { raw } => Some(raw),
            LlmError::Shape { raw, .. } => raw.as_deref(),
            _ => None,
        }
    }

    pub(crate) fn shape(detail: impl Into<String>) -> Self {
        LlmError::Shape {
            detail: detail.into(),
            raw: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompletionRequest {
    pub system_prompt: String,
    pub user_message: String,
    #[serde(default)]
    pub image_attachments: Vec<ImageAttachment>,
    pub purpose: Purpose,
    pub max_retries: u8,
}

impl From<PromptBundle> for CompletionRequest {
    fn from(b: PromptBundle) -> Self {
        Self {
            system_prompt: b.system_prompt,
            user_message: b.user_context,
            image_attachments: b.attachments,
            purpose: b.purpose,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

impl CompletionRequest {
    /// Stable hash over purpose, prompts and attachment bytes. Retry budget
    /// is not part of the identity.
    pub fn canonical_hash(&self) -> String {
        let mut h = Sha256::new();
        let mut field = |bytes: &[u8]| {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        };
        field(self.purpose.as_str().as_bytes());
        field(self.system_prompt.as_bytes());
        field(self.user_message.as_bytes());
        for a in &self.image_attachments {
            field(a.mime.as_bytes());
            field(a.data.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn with_repair_instruction(&self) -> Self {
        let mut next = self.clone();
        next.user_message = format!("{}\n\n{REPAIR_INSTRUCTION}", self.user_message);
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RawCompletion {
    pub text: String,
    pub usage: Option<Usage>,
    pub latency: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    Replay,
    Record,
}

#[async_trait]
pub trait CompletionBackend: Send + Sync {
    async fn complete(&self, request: &CompletionRequest) -> Result<RawCompletion, LlmError>;

    fn mode(&self) -> BackendMode;
}

/// Removes one surrounding code fence (with or without a language tag).
pub fn strip_code_fence(raw: &str) -> &str {
    let t = raw.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = match rest.find('\n') {
        Some(nl) if rest[..nl].trim().chars().all(|c| c.is_ascii_alphanumeric()) => &rest[nl + 1..],
        Some(_) => rest,
        None => rest.trim_start_matches(|c: char| c.is_ascii_alphanumeric()),
    };
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

pub fn extract_json(raw: &str) -> Result<Value, LlmError> {
    serde_json::from_str(strip_code_fence(raw)).map_err(|_| LlmError::MalformedReply {
        raw: raw.to_string(),
    })
}

/// Completes a request and parses the reply as JSON, re-asking with a repair
/// instruction up to `max_retries` times.
pub async fn complete_json(
    backend: &dyn CompletionBackend,
    request: &CompletionRequest,
) -> Result<(Value, RawCompletion), LlmError> {
    let mut current = request.clone();
    let mut attempt = 0;
    loop {
        let raw = backend.complete(&current).await?;
        match extract_json(&raw.text) {
            Ok(v) => return Ok((v, raw)),
            Err(e) if attempt >= request.max_retries => return Err(e),
            Err(_) => {
                attempt += 1;
                tracing::debug!(purpose = request.purpose.as_str(), attempt, "retrying malformed JSON reply");
                current = current.with_repair_instruction();
            }
        }
    }
}

/// Label/value pairs per bucket. Always holds all three groups.
pub type Buckets = BTreeMap<GroupName, Vec<(String, String)>>;

fn bucket_key(key: &str) -> Option<GroupName> {
    GroupName::from_bucket_label(key).or(match key {
        "VisualStyle" => Some(GroupName::VisualStyle),
        "ContentSources" => Some(GroupName::ContentSources),
        _ => None,
    })
}

/// Parses a `{"Narrative": [...], "Visual Style": [...], "Content Sources": [...]}`
/// reply. Missing buckets are empty, unknown keys are ignored, entries with
/// an empty value are dropped.
pub fn parse_suggestions(json: &Value) -> Result<Buckets, LlmError> {
    let obj = json
        .as_object()
        .ok_or_else(|| LlmError::shape("expected a JSON object of buckets"))?;
    let mut out: Buckets = GroupName::ALL.into_iter().map(|g| (g, Vec::new())).collect();
    for (key, value) in obj {
        let Some(group) = bucket_key(key) else { continue };
        let items = value
            .as_array()
            .ok_or_else(|| LlmError::shape(format!("bucket {key:?} is not a list")))?;
        for item in items {
            let text = item
                .as_str()
                .ok_or_else(|| LlmError::shape(format!("bucket {key:?} holds a non-string entry")))?;
            let (label, value) = parse_attr_value(text);
            if !value.is_empty() {
                out.get_mut(&group).unwrap().push((label, value));
            }
        }
    }
    Ok(out)
}

pub const GROUNDING_MIN: usize = 2;
pub const GROUNDING_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundingParse {
    pub buckets: Buckets,
    /// Buckets whose entry count falls outside 2..=6.
    pub out_of_range: Vec<GroupName>,
}

pub fn parse_grounding(json: &Value) -> Result<GroundingParse, LlmError> {
    let buckets = parse_suggestions(json)?;
    let out_of_range = buckets
        .iter()
        .filter(|(_, v)| !(GROUNDING_MIN..=GROUNDING_MAX).contains(&v.len()))
        .map(|(g, _)| *g)
        .collect();
    Ok(GroundingParse {
        buckets,
        out_of_range,
    })
}
