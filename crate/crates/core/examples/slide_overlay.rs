//! Ground one slide into tags, override a style tag, generate a variation,
//! then apply it to the slide and to the whole deck.

use tagdeck::demo;
use tagdeck::ingest::AssetStore;
use tagdeck::pipeline::{apply_style_to_deck, apply_variation, Pipeline};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let board = demo::kayaking_board();
    let assets = AssetStore::new();
    let pipeline = Pipeline::new(demo::replay_backend());
    let outline = pipeline.outline_reply(&board, &assets).await?;
    let deck = pipeline.deck_reply(&board, &assets, &outline.markdown, None).await?.deck;

    let mut session = pipeline.open_slide_session(&deck, demo::KAYAKING_SESSION_SLIDE).await?;
    println!("grounded slide {} ({:?} mode):", session.slide_number, session.grounding_mode);
    for (group, tags) in session.scoped_board.active_tags_by_group() {
        let names: Vec<String> = tags.iter().filter_map(|t| t.concept()).map(|c| c.micro_prompt()).collect();
        println!("  {group}: {}", names.join(", "));
    }

    demo::color_override(&mut session.scoped_board);
    pipeline.generate_slide_variations(&mut session, &assets, 1).await?;
    let slide_only = apply_variation(&deck, &session, 0)?;
    let whole_deck = apply_style_to_deck(&deck, &session, 0)?;
    let colors = &slide_only.slide(demo::KAYAKING_SESSION_SLIDE).unwrap().theme.colors;
    println!("slide {} colors now {} / {} / {}", demo::KAYAKING_SESSION_SLIDE, colors.primary, colors.secondary, colors.tertiary);
    let restyled = whole_deck.slides.iter().filter(|s| s.theme.colors == *colors).count();
    println!("deck restyle: {restyled}/{} slides share the new palette", whole_deck.slides.len());
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
