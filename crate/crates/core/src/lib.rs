//! Intent-tag steering for generative slide decks.
//!
//! A [`board::TagBoard`] holds `[label:value]` tags arranged in three
//! groups. Active tags are serialized into model prompts that produce an
//! outline, then a deck of slides; generated slides can be turned back into
//! tags for editing.

pub mod artifacts;
pub mod board;
pub mod demo;
pub mod ingest;
pub mod llm;
pub mod pipeline;
pub mod preview;
pub mod project;
pub mod prompts;

pub use board::{GroupName, Tag, TagBoard, TagId};
