//! Decompose a free-text request into active tags.

use tagdeck::demo;
use tagdeck::pipeline::Pipeline;
use tagdeck::TagBoard;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut board = TagBoard::new("grounding");
    let pipeline = Pipeline::new(demo::replay_backend());
    let ids = pipeline.ground_from_text(&mut board, demo::MARIE_CURIE).await?;
    println!("\"{}\" ->", demo::MARIE_CURIE);
    for id in ids {
        let tag = board.tag(&id)?;
        let group = tag.group.map(|g| g.to_string()).unwrap_or_default();
        println!("  {group:<16} [{}]", tag.concept().unwrap().micro_prompt());
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
