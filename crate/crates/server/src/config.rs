use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use tagdeck::demo;
use tagdeck::ingest::{BingImageSearch, DisabledImageSearch, ImageSearchClient, ImageSuggester, MockImageSearch, BING_ENDPOINT};
use tagdeck::llm::{
    CompletionBackend, LiveConfig, LlmError, OpenAiBackend, RecordBackend, ReplayBackend, DEFAULT_ENDPOINT,
    DEFAULT_KEY_ENV, DEFAULT_MODEL,
};
use tagdeck::pipeline::{BlockRasterizer, Pipeline, PipelineConfig};
use tagdeck::preview::PreviewConfig;
use thiserror::Error;

use crate::state::{AppState, ServiceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    /// Call the completion endpoint.
    Live,
    /// Answer from a replay store; unknown requests fail.
    Replay,
    /// Call the endpoint and append every reply to a replay store.
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImageSearchChoice {
    Mock,
    Live,
    Off,
}

/// Serves the tagdeck HTTP API.
#[derive(Debug, Clone, Parser)]
#[command(name = "tagdeck-serve", version)]
pub struct Cli {
    #[arg(long, default_value = "127.0.0.1", env = "TAGDECK_HOST")]
    pub host: String,
    #[arg(long, default_value_t = 8080, env = "TAGDECK_PORT")]
    pub port: u16,

    #[arg(long, value_enum, default_value = "replay", env = "TAGDECK_BACKEND")]
    pub backend: BackendChoice,
    /// Replay store for `--backend replay`; the bundled demo store when absent.
    #[arg(long)]
    pub replay_store: Option<PathBuf>,
    /// Where `--backend record` writes replies.
    #[arg(long, default_value = "replay-store.json")]
    pub record_store: PathBuf,
    #[arg(long, default_value = DEFAULT_ENDPOINT)]
    pub endpoint: String,
    #[arg(long, default_value = DEFAULT_MODEL)]
    pub model: String,
    /// Environment variable holding the completion API key.
    #[arg(long, default_value = DEFAULT_KEY_ENV)]
    pub api_key_env: String,
    #[arg(long, default_value_t = 4)]
    pub max_inflight: usize,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,

    #[arg(long, value_enum, default_value = "mock")]
    pub image_search: ImageSearchChoice,
    /// Fixture file for `--image-search mock`; the bundled fixture when absent.
    #[arg(long)]
    pub image_fixtures: Option<PathBuf>,
    #[arg(long, default_value = BING_ENDPOINT)]
    pub image_search_endpoint: String,
    #[arg(long, default_value = "BING_SEARCH_KEY")]
    pub image_search_key_env: String,

    /// Ground slides from block-rendered images instead of slide text.
    #[arg(long)]
    pub rasterize: bool,
    /// Skip preview scheduling after board edits.
    #[arg(long)]
    pub no_auto_previews: bool,
    #[arg(long, default_value_t = 5)]
    pub alternatives: usize,
    #[arg(long, default_value_t = 8)]
    pub preview_budget: usize,
    /// Directory for server-side project saves.
    #[arg(long)]
    pub projects_dir: Option<PathBuf>,
    /// Base URL used in links to uploaded images.
    #[arg(long)]
    pub public_url: Option<String>,
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("completion backend: {0}")]
    Backend(#[from] LlmError),
    #[error("environment variable {0} is not set (needed for --image-search live)")]
    MissingSearchKey(String),
    #[error("image search fixtures: {0}")]
    Fixtures(String),
}

fn live_config(cli: &Cli) -> LiveConfig {
    LiveConfig {
        endpoint: cli.endpoint.clone(),
        model: cli.model.clone(),
        api_key_env: cli.api_key_env.clone(),
        max_in_flight: cli.max_inflight,
        temperature: None,
        timeout: Duration::from_secs(cli.timeout_secs),
    }
}

pub fn build_backend(cli: &Cli) -> Result<Arc<dyn CompletionBackend>, StartupError> {
    Ok(match cli.backend {
        BackendChoice::Live => Arc::new(OpenAiBackend::from_env(live_config(cli))?),
        BackendChoice::Record => {
            let live: Arc<dyn CompletionBackend> = Arc::new(OpenAiBackend::from_env(live_config(cli))?);
            Arc::new(RecordBackend::new(live, cli.record_store.clone())?)
        }
        BackendChoice::Replay => match &cli.replay_store {
            Some(path) => Arc::new(ReplayBackend::from_path(path)?),
            None => demo::replay_backend(),
        },
    })
}

pub fn build_image_search(cli: &Cli) -> Result<Arc<dyn ImageSearchClient>, StartupError> {
    Ok(match cli.image_search {
        ImageSearchChoice::Off => Arc::new(DisabledImageSearch),
        ImageSearchChoice::Mock => match &cli.image_fixtures {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| StartupError::Fixtures(format!("{}: {e}", path.display())))?;
                Arc::new(MockImageSearch::from_json(&bytes).map_err(|e| StartupError::Fixtures(e.to_string()))?)
            }
            None => Arc::new(demo::mock_image_search()),
        },
        ImageSearchChoice::Live => {
            let key = std::env::var(&cli.image_search_key_env)
                .map_err(|_| StartupError::MissingSearchKey(cli.image_search_key_env.clone()))?;
            Arc::new(BingImageSearch::new(cli.image_search_endpoint.clone(), key, cli.max_inflight))
        }
    })
}

pub fn build_state(cli: &Cli) -> Result<AppState, StartupError> {
    let backend = build_backend(cli)?;
    let images = ImageSuggester::new(build_image_search(cli)?);
    let pipeline = Pipeline::with_config(
        backend,
        PipelineConfig {
            rasterizer: cli.rasterize.then(|| Arc::new(BlockRasterizer::default()) as _),
            text_fallback: true,
        },
    );
    let config = ServiceConfig {
        preview: PreviewConfig {
            alternatives: cli.alternatives,
            budget: cli.preview_budget,
        },
        auto_previews: !cli.no_auto_previews,
        public_url: cli
            .public_url
            .clone()
            .unwrap_or_else(|| format!("http://{}:{}", cli.host, cli.port)),
        projects_dir: cli.projects_dir.clone(),
    };
    Ok(AppState::new(pipeline, images, config))
}
