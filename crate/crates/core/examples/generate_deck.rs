//! Board to suggestions to outline to deck, answered from the bundled replay
//! store. Writes the deck HTML to the path given as the first argument.

use tagdeck::artifacts::render_deck;
use tagdeck::demo;
use tagdeck::ingest::AssetStore;
use tagdeck::pipeline::Pipeline;
use tagdeck::prompts::render_user_context;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut board = demo::yoga_board();
    let assets = AssetStore::new();
    let pipeline = Pipeline::new(demo::replay_backend());

    println!("{}\n", render_user_context(&board, &assets));
    let suggested = pipeline.request_suggestions(&mut board, &assets).await?;
    println!("{} suggested tags:", suggested.len());
    for id in &suggested {
        println!("  [{}]", board.tag(id)?.concept().map(|c| c.micro_prompt()).unwrap_or_default());
    }

    let outline = pipeline.generate_outline(&mut board, &assets).await?;
    println!("\n{}", outline.markdown);
    let result = pipeline.generate_deck(&mut board, &assets, &outline.markdown).await?;
    println!("{} slides, {} violations", result.deck.slides.len(), result.violations.len());

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, render_deck(&result.deck))?;
        println!("wrote {path}");
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
