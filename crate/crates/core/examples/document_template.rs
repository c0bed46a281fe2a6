//! A Word document with one section selected and a reference deck used as
//! the style template.

use tagdeck::demo;
use tagdeck::pipeline::Pipeline;
use tagdeck::prompts::render_user_context;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (mut board, assets) = demo::tesla_workspace()?;
    println!("{}\n", render_user_context(&board, &assets));
    let pipeline = Pipeline::new(demo::replay_backend());
    let outline = pipeline.generate_outline(&mut board, &assets).await?;
    println!("{}", outline.markdown);
    let deck = pipeline.generate_deck(&mut board, &assets, &outline.markdown).await?.deck;
    for slide in &deck.slides {
        println!(
            "slide {} {:<16} bg {}",
            slide.slide_number,
            slide.layout,
            slide.content.background_image.as_deref().unwrap_or("-")
        );
    }
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
