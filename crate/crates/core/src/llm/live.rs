use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde_json::{json, Value};
use tokio::sync::Semaphore;

use super::{BackendMode, CompletionBackend, CompletionRequest, LlmError, RawCompletion, Usage};

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o";
pub const DEFAULT_KEY_ENV: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub max_in_flight: usize,
    /// Sampling temperature; `None` leaves the provider default.
    pub temperature: Option<f32>,
    pub timeout: Duration,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: DEFAULT_ENDPOINT.into(),
            model: DEFAULT_MODEL.into(),
            api_key_env: DEFAULT_KEY_ENV.into(),
            max_in_flight: 4,
            temperature: None,
            timeout: Duration::from_secs(120),
        }
    }
}

/// OpenAI-compatible `/chat/completions` client with a cap on concurrent
/// requests.
pub struct OpenAiBackend {
    config: LiveConfig,
    api_key: String,
    http: reqwest::Client,
    in_flight: Semaphore,
}

impl OpenAiBackend {
    /// Reads the key from the configured environment variable.
    pub fn from_env(config: LiveConfig) -> Result<Self, LlmError> {
        let key = std::env::var(&config.api_key_env).map_err(|_| {
            LlmError::Config(format!(
                "environment variable {} is not set (needed for the live backend)",
                config.api_key_env
            ))
        })?;
        Ok(Self::with_key(config, key))
    }

    pub fn with_key(config: LiveConfig, api_key: impl Into<String>) -> Self {
        let http = reqwest::Client::builder()
            .timeout(config.timeout)
            .build()
            .expect("http client builds");
        Self {
            in_flight: Semaphore::new(config.max_in_flight.max(1)),
            config,
            api_key: api_key.into(),
            http,
        }
    }

    fn body(&self, request: &CompletionRequest) -> Value {
        let user = if request.image_attachments.is_empty() {
            json!(request.user_message)
        } else {
            let mut parts = Vec::new();
            if !request.user_message.is_empty() {
                parts.push(json!({"type": "text", "text": request.user_message}));
            }
            parts.extend(
                request
                    .image_attachments
                    .iter()
                    .map(|a| json!({"type": "image_url", "image_url": {"url": a.data_url()}})),
            );
            Value::Array(parts)
        };
        let mut body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": user},
            ],
        });
        if let Some(t) = self.config.temperature {
            body["temperature"] = json!(t);
        }
        body
    }
}

#[async_trait]
impl CompletionBackend for OpenAiBackend {
    async fn complete(&self, request: &CompletionRequest) -> Result<RawCompletion, LlmError> {
        let _permit = self.in_flight.acquire().await.expect("semaphore never closed");
        let started = Instant::now();
        let resp = self
            .http
            .post(&self.config.endpoint)
            .bearer_auth(&self.api_key)
            .json(&self.body(request))
            .send()
            .await
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .text()
            .await
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(LlmError::Auth(format!("provider returned {status}")));
        }
        if !status.is_success() {
            return Err(LlmError::Transport(format!("provider returned {status}: {text}")));
        }
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| LlmError::Transport(format!("unreadable provider reply: {e}")))?;
        let content = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| LlmError::Transport("provider reply has no message content".into()))?;
        let usage = v.get("usage").and_then(|u| {
            Some(Usage {
                prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
                completion_tokens: u.get("completion_tokens")?.as_u64()?,
            })
        });
        Ok(RawCompletion {
            text: content.to_string(),
            usage,
            latency: started.elapsed(),
        })
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Live
    }
}
