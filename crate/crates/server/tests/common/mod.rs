#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tagdeck::demo;
use tagdeck::ingest::{DisabledImageSearch, ImageSearchClient, ImageSuggester};
use tagdeck::llm::{BackendMode, CompletionBackend, CompletionRequest, LlmError, RawCompletion};
use tagdeck::pipeline::Pipeline;
use tagdeck_server::{router, AppState, ServiceConfig};
use tokio::sync::Semaphore;
use tower::ServiceExt;

/// Replay backend that waits for a permit before answering.
pub struct Gated {
    pub gate: Arc<Semaphore>,
}

#[async_trait]
impl CompletionBackend for Gated {
    async fn complete(&self, request: &CompletionRequest) -> Result<RawCompletion, LlmError> {
        self.gate.acquire().await.expect("gate open").forget();
        demo::replay_backend().complete(request).await
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Replay
    }
}

pub struct Harness {
    pub state: AppState,
    pub app: Router,
}

pub fn harness_with(backend: Arc<dyn CompletionBackend>, search: Arc<dyn ImageSearchClient>, config: ServiceConfig) -> Harness {
    let state = AppState::new(Pipeline::new(backend), ImageSuggester::new(search), config);
    Harness {
        app: router(state.clone()),
        state,
    }
}

pub fn harness() -> Harness {
    harness_with(demo::replay_backend(), Arc::new(demo::mock_image_search()), ServiceConfig::default())
}

pub fn harness_no_search() -> Harness {
    harness_with(demo::replay_backend(), Arc::new(DisabledImageSearch), ServiceConfig::default())
}

pub fn gated() -> (Harness, Arc<Semaphore>) {
    let gate = Arc::new(Semaphore::new(0));
    let h = harness_with(
        Arc::new(Gated { gate: gate.clone() }),
        Arc::new(demo::mock_image_search()),
        ServiceConfig::default(),
    );
    (h, gate)
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.bytes)
            .unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.bytes)))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.bytes).into_owned()
    }

    pub fn etag(&self) -> Option<String> {
        self.headers.get("etag").map(|v| v.to_str().unwrap().to_string())
    }
}

impl Harness {
    pub async fn send(&self, method: Method, uri: &str, headers: &[(&str, &str)], body: Vec<u8>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        for (k, v) in headers {
            req = req.header(*k, *v);
        }
        let resp = self
            .app
            .clone()
            .oneshot(req.body(Body::from(body)).unwrap())
            .await
            .unwrap();
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        Reply { status, headers, bytes }
    }

    pub async fn get(&self, uri: &str) -> Reply {
        self.send(Method::GET, uri, &[], Vec::new()).await
    }

    pub async fn json(&self, method: Method, uri: &str, body: Value) -> Reply {
        self.send(method, uri, &[("content-type", "application/json")], serde_json::to_vec(&body).unwrap())
            .await
    }

    pub async fn json_if(&self, method: Method, uri: &str, rev: &str, body: Value) -> Reply {
        self.send(
            method,
            uri,
            &[("content-type", "application/json"), ("if-match", rev)],
            serde_json::to_vec(&body).unwrap(),
        )
        .await
    }

    pub async fn post(&self, uri: &str) -> Reply {
        self.send(Method::POST, uri, &[], Vec::new()).await
    }

    /// Starts a job, waits for it and returns its final state.
    pub async fn run_job(&self, uri: &str, body: Option<Value>) -> Value {
        let r = match body {
            Some(b) => self.json(Method::POST, uri, b).await,
            None => self.post(uri).await,
        };
        assert_eq!(r.status, StatusCode::ACCEPTED, "{uri}: {}", r.text());
        let id = r.json()["jobId"].as_str().unwrap().to_string();
        self.state.settle().await;
        self.get(&format!("/api/v1/jobs/{id}")).await.json()
    }

    pub async fn create_board(&self, body: Value) -> Value {
        let r = self.json(Method::POST, "/api/v1/boards", body).await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
        r.json()
    }

    /// Polls a preview lookup until it leaves `pending`.
    pub async fn poll(&self, uri: &str) -> Value {
        for _ in 0..500 {
            let v = self.get(uri).await.json();
            if v["status"] != "pending" {
                return v;
            }
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        panic!("{uri} stayed pending");
    }
}

pub fn tag_id(board: &Value, label: &str) -> String {
    board["tags"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["label"] == label)
        .unwrap_or_else(|| panic!("no tag labelled {label}"))["id"]
        .as_str()
        .unwrap()
        .to_string()
}

pub fn board_json(board: &tagdeck::TagBoard) -> Value {
    serde_json::from_slice(&tagdeck::board::serialize_board(board)).unwrap()
}
