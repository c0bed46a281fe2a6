use std::sync::{Arc, Mutex};

use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use tagdeck::llm::{CompletionBackend, CompletionRequest, LiveConfig, LlmError, OpenAiBackend, RecordBackend, ReplayStore};
use tagdeck::prompts::build_text_grounding_prompt;

type Seen = Arc<Mutex<Vec<Value>>>;

async fn stub(reply: &'static str) -> (String, Seen) {
    let seen: Seen = Arc::default();
    let log = seen.clone();
    let app = Router::new().route(
        "/v1/chat/completions",
        post(move |headers: HeaderMap, Json(body): Json<Value>| {
            let log = log.clone();
            async move {
                log.lock().unwrap().push(body);
                if headers.get("authorization").and_then(|v| v.to_str().ok()) != Some("Bearer good") {
                    return (StatusCode::UNAUTHORIZED, Json(json!({"error": "bad key"})));
                }
                (
                    StatusCode::OK,
                    Json(json!({
                        "choices": [{"message": {"role": "assistant", "content": reply}}],
                        "usage": {"prompt_tokens": 11, "completion_tokens": 7}
                    })),
                )
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/chat/completions"), seen)
}

fn config(endpoint: String) -> LiveConfig {
    LiveConfig {
        endpoint,
        model: "stub-model".into(),
        ..LiveConfig::default()
    }
}

fn request() -> CompletionRequest {
    build_text_grounding_prompt("a talk about tides").unwrap().into()
}

#[tokio::test]
async fn bad_key_is_an_auth_error() {
    let (endpoint, _) = stub("{}").await;
    let backend = OpenAiBackend::with_key(config(endpoint), "wrong");
    assert!(matches!(backend.complete(&request()).await, Err(LlmError::Auth(_))));
}

#[tokio::test]
async fn sends_system_and_user_messages() {
    let (endpoint, seen) = stub("{\"Narrative\": []}").await;
    let backend = OpenAiBackend::with_key(config(endpoint), "good");
    let out = backend.complete(&request()).await.unwrap();
    assert_eq!(out.text, "{\"Narrative\": []}");
    assert_eq!(out.usage.unwrap().completion_tokens, 7);
    let body = seen.lock().unwrap()[0].clone();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], request().user_message);
}

#[tokio::test]
async fn missing_key_names_the_variable() {
    let cfg = LiveConfig {
        api_key_env: "TAGDECK_TEST_SURELY_UNSET_KEY".into(),
        ..LiveConfig::default()
    };
    let err = OpenAiBackend::from_env(cfg).err().unwrap();
    assert!(err.to_string().contains("TAGDECK_TEST_SURELY_UNSET_KEY"));
}

#[tokio::test]
async fn record_backend_persists_replies() {
    let (endpoint, _) = stub("recorded").await;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.json");
    let live = Arc::new(OpenAiBackend::with_key(config(endpoint), "good"));
    let recorder = RecordBackend::new(live, &path).unwrap();
    recorder.complete(&request()).await.unwrap();
    let store = ReplayStore::load(&path).unwrap();
    assert_eq!(store.get(&request().canonical_hash()), Some("recorded"));
}
