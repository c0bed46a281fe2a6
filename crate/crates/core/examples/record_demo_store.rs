//! Regenerates `fixtures/replay/demo.json` from the canned replies.
//!
//! cargo run -p tagdeck-core --example record_demo_store [-- OUTPUT]

use std::path::PathBuf;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay/demo.json"));
    let store = tagdeck::demo::build_replay_store().await?;
    store.save(&out)?;
    println!("{} replies -> {}", store.len(), out.display());
    Ok(())
}
