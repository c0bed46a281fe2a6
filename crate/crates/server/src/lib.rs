//! HTTP session service over the tagdeck engine.

pub mod api;
pub mod config;
pub mod error;
pub mod state;

pub use api::router;
pub use config::{build_state, Cli, StartupError};
pub use error::{ApiError, ErrorCode};
pub use state::{AppState, ServiceConfig};
