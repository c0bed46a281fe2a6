//! Image suggestions from the mock search provider: five per call, a new
//! page each time, and a warning instead of an error when the provider fails.

use std::sync::Arc;

use tagdeck::demo;
use tagdeck::ingest::{apply_image_suggestions, AssetStore, ImageSuggester, MockImageSearch};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut board = demo::kayaking_board();
    let mut assets = AssetStore::new();
    let suggester = ImageSuggester::new(Arc::new(demo::mock_image_search()));
    for _ in 0..2 {
        let found = suggester.suggest(&board).await;
        println!("query {:?} page {}", found.query, found.page);
        for id in apply_image_suggestions(&mut board, &mut assets, &found)? {
            let source = &board.tag(&id)?.reference().unwrap().source;
            println!("  {id} {}", assets.image(source).map(|i| i.prompt_url()).unwrap_or_default());
        }
    }

    let broken = ImageSuggester::new(Arc::new(MockImageSearch::default()));
    let found = broken.suggest(&board).await;
    println!("provider down: {} images, warning {:?}", found.assets.len(), found.warning);
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
