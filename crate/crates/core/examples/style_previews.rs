//! Slider and drop-down previews for style tags, computed in the background
//! and read from the cache. An edit makes the cached entries stale.

use tagdeck::demo::{self, find_tag};
use tagdeck::ingest::AssetStore;
use tagdeck::pipeline::Pipeline;
use tagdeck::preview::{commit_slider_step, Lookup, PreviewConfig, PreviewEngine, SlideContext};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut board = demo::style_board();
    let assets = AssetStore::new();
    let backend = demo::replay_backend();

    let kayak = demo::kayaking_board();
    let pipeline = Pipeline::new(backend.clone());
    let outline = pipeline.outline_reply(&kayak, &assets).await?;
    let deck = pipeline.deck_reply(&kayak, &assets, &outline.markdown, None).await?.deck;

    let engine = PreviewEngine::new(backend, PreviewConfig::default());
    engine.auto_schedule(&board, &assets, SlideContext::for_deck(&deck, None));
    engine.settle().await;

    let typography = find_tag(&board, "Typography").unwrap();
    if let Lookup::Fresh(spec) = engine.get_slider(&typography)? {
        println!("Typography slider:");
        for (i, step) in spec.steps.iter().enumerate() {
            println!("  {i}: {:<22} {}", step.value, step.description);
        }
        commit_slider_step(&mut board, &spec, 2)?;
        println!("committed step 2 -> {}", board.tag(&typography)?.concept().unwrap().value);
    }

    let colors = find_tag(&board, "ColorScheme").unwrap();
    if let Lookup::Fresh(set) = engine.get_alternatives(&colors)? {
        println!("ColorScheme alternatives:");
        for (option, preview) in &set.previews {
            println!("  {option:<20} preview {}", preview.as_deref().unwrap_or("-"));
        }
    }

    engine.handle_events(&board.drain_events());
    println!("after the edit the slider reads {:?}", engine.get_slider(&typography)?.status());
    println!("{}", serde_json::to_string(&engine.metrics())?);
    Ok(())
}

trait Status {
    fn status(&self) -> &'static str;
}

impl<P> Status for Lookup<P> {
    fn status(&self) -> &'static str {
        match self {
            Lookup::Fresh(_) => "fresh",
            Lookup::Failed(_) => "failed",
            Lookup::Pending => "pending",
        }
    }
}

#[test]
fn runs() {
    main().unwrap();
}
