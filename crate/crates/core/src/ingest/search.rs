//! Background image search for image suggestions.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, Semaphore};

use super::{ImageAsset, ImageSourceKind, IngestError};
use crate::board::{GroupName, TagBoard};

/// Results per search call.
pub const RESULTS_PER_SEARCH: usize = 5;
/// Narrative values that go into a query.
pub const QUERY_TERMS: usize = 5;
pub const QUERY_MAX_CHARS: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageHit {
    pub url: String,
    #[serde(default)]
    pub thumbnail_url: Option<String>,
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub height: Option<u32>,
}

#[async_trait]
pub trait ImageSearchClient: Send + Sync {
    /// One page of results. `page` counts from zero.
    async fn search(&self, query: &str, page: u32) -> Result<Vec<ImageHit>, IngestError>;

    fn mode(&self) -> &'static str;
}

/// Fixture-backed search. Pages cycle when a query is asked more often than
/// it has pages.
#[derive(Debug, Clone, Default)]
pub struct MockImageSearch {
    pages: BTreeMap<String, Vec<Vec<ImageHit>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FixtureHit {
    Url(String),
    Hit(ImageHit),
}

impl MockImageSearch {
    /// Fixture JSON: `{ "<query>": [[hit, ...], ...] }` where a hit is a url
    /// string or an object. The `"*"` key answers queries with no entry.
    pub fn from_json(bytes: &[u8]) -> Result<Self, IngestError> {
        let raw: BTreeMap<String, Vec<Vec<FixtureHit>>> = serde_json::from_slice(bytes)
            .map_err(|e| IngestError::Import(format!("image search fixtures: {e}")))?;
        let pages = raw
            .into_iter()
            .map(|(q, pages)| {
                let pages = pages
                    .into_iter()
                    .map(|page| {
                        page.into_iter()
                            .map(|h| match h {
                                FixtureHit::Url(url) => ImageHit {
                                    url,
                                    thumbnail_url: None,
                                    width: None,
                                    height: None,
                                },
                                FixtureHit::Hit(h) => h,
                            })
                            .collect()
                    })
                    .collect();
                (q, pages)
            })
            .collect();
        Ok(Self { pages })
    }

    pub fn insert(&mut self, query: impl Into<String>, pages: Vec<Vec<ImageHit>>) {
        self.pages.insert(query.into(), pages);
    }
}

#[async_trait]
impl ImageSearchClient for MockImageSearch {
    async fn search(&self, query: &str, page: u32) -> Result<Vec<ImageHit>, IngestError> {
        let pages = self
            .pages
            .get(query)
            .or_else(|| self.pages.get("*"))
            .filter(|p| !p.is_empty())
            .ok_or_else(|| IngestError::Search(format!("no fixture for query {query:?}")))?;
        Ok(pages[page as usize % pages.len()].clone())
    }

    fn mode(&self) -> &'static str {
        "mock"
    }
}

/// Answers every search with an error; suggestions then carry a warning.
#[derive(Debug, Clone, Copy, Default)]
pub struct DisabledImageSearch;

#[async_trait]
impl ImageSearchClient for DisabledImageSearch {
    async fn search(&self, _query: &str, _page: u32) -> Result<Vec<ImageHit>, IngestError> {
        Err(IngestError::Search("image search is disabled".into()))
    }

    fn mode(&self) -> &'static str {
        "off"
    }
}

/// Bing Image Search v7 compatible client.
pub struct BingImageSearch {
    endpoint: String,
    key: String,
    http: reqwest::Client,
    limit: Semaphore,
}

pub const BING_ENDPOINT: &str = "https://api.bing.microsoft.com/v7.0/images/search";

impl BingImageSearch {
    pub fn new(endpoint: impl Into<String>, key: impl Into<String>, max_in_flight: usize) -> Self {
        Self {
            endpoint: endpoint.into(),
            key: key.into(),
            http: reqwest::Client::new(),
            limit: Semaphore::new(max_in_flight.max(1)),
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct BingResponse {
    #[serde(default)]
    value: Vec<BingImage>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct BingImage {
    content_url: String,
    #[serde(default)]
    thumbnail_url: Option<String>,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
}

#[async_trait]
impl ImageSearchClient for BingImageSearch {
    async fn search(&self, query: &str, page: u32) -> Result<Vec<ImageHit>, IngestError> {
        let _permit = self.limit.acquire().await.expect("semaphore never closed");
        let offset = page as usize * RESULTS_PER_SEARCH;
        let resp = self
            .http
            .get(&self.endpoint)
            .header("Ocp-Apim-Subscription-Key", &self.key)
            .query(&[
                ("q", query.to_string()),
                ("count", RESULTS_PER_SEARCH.to_string()),
                ("offset", offset.to_string()),
                ("safeSearch", "Strict".to_string()),
            ])
            .send()
            .await
            .map_err(|e| IngestError::Search(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(IngestError::Search(format!("provider returned {}", resp.status())));
        }
        let body: BingResponse = resp
            .json()
            .await
            .map_err(|e| IngestError::Search(format!("unreadable provider reply: {e}")))?;
        Ok(body
            .value
            .into_iter()
            .map(|i| ImageHit {
                url: i.content_url,
                thumbnail_url: i.thumbnail_url,
                width: i.width,
                height: i.height,
            })
            .collect())
    }

    fn mode(&self) -> &'static str {
        "live"
    }
}

/// Query from the active Narrative values, most recently touched first.
pub fn image_query(board: &TagBoard) -> String {
    let mut narrative: Vec<_> = board
        .active_concepts()
        .filter(|(t, c)| t.group == Some(GroupName::Narrative) && !c.value.trim().is_empty())
        .collect();
    narrative.sort_by(|a, b| b.0.revision.cmp(&a.0.revision));
    let mut query = String::new();
    for (_, c) in narrative.into_iter().take(QUERY_TERMS) {
        let term = c.value.trim();
        let extra = if query.is_empty() { term.len() } else { term.len() + 1 };
        if query.len() + extra > QUERY_MAX_CHARS {
            break;
        }
        if !query.is_empty() {
            query.push(' ');
        }
        query.push_str(term);
    }
    query
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageSuggestions {
    pub query: String,
    pub page: u32,
    pub assets: Vec<ImageAsset>,
    /// Set when the search failed; the result is then empty.
    pub warning: Option<String>,
}

/// Wraps a search client and remembers how far each query has paged, so
/// repeated requests return fresh images.
pub struct ImageSuggester {
    client: Arc<dyn ImageSearchClient>,
    next_page: Mutex<HashMap<String, u32>>,
}

impl ImageSuggester {
    pub fn new(client: Arc<dyn ImageSearchClient>) -> Self {
        Self {
            client,
            next_page: Mutex::new(HashMap::new()),
        }
    }

    pub fn mode(&self) -> &'static str {
        self.client.mode()
    }

    /// Never fails: provider problems come back as a warning with no assets.
    pub async fn suggest(&self, board: &TagBoard) -> ImageSuggestions {
        let query = image_query(board);
        if query.is_empty() {
            return ImageSuggestions {
                query,
                page: 0,
                assets: Vec::new(),
                warning: Some("no active Narrative tags to search images for".into()),
            };
        }
        let page = {
            let mut pages = self.next_page.lock().await;
            let p = pages.entry(query.clone()).or_insert(0);
            let current = *p;
            *p += 1;
            current
        };
        let result = self.client.search(&query, page).await.and_then(|hits| {
            if hits.len() < RESULTS_PER_SEARCH {
                Err(IngestError::Search(format!(
                    "provider returned {} images, expected {RESULTS_PER_SEARCH}",
                    hits.len()
                )))
            } else {
                Ok(hits)
            }
        });
        match result {
            Ok(hits) => ImageSuggestions {
                assets: hits
                    .into_iter()
                    .take(RESULTS_PER_SEARCH)
                    .map(|h| ImageAsset::remote(h.url, h.width, h.height, ImageSourceKind::Search))
                    .collect(),
                query,
                page,
                warning: None,
            },
            Err(e) => {
                tracing::warn!(error = %e, "image search failed");
                ImageSuggestions {
                    query,
                    page,
                    assets: Vec::new(),
                    warning: Some(format!("image search unavailable: {e}")),
                }
            }
        }
    }
}
