//! Bundled demo scenarios and the canned model replies that back them.
//!
//! [`build_replay_store`] walks every scenario through the real pipeline and
//! records a reply for each request it makes, so the stored hashes always
//! match what the flows send. The result is checked in as
//! `fixtures/replay/demo.json`.

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::artifacts::SlideDeck;
use crate::board::{GroupName, Position, ReferenceKind, ReferenceTag, TagBoard, TagId, TagOrigin};
use crate::ingest::{attach_document, attach_template, import_deck_template, import_docx, select_sections, AssetStore, IngestError, MockImageSearch};
use crate::llm::{CompletionRequest, ReplayBackend, ReplayStore};
use crate::pipeline::{Pipeline, PipelineError};
use crate::preview::{parse_alternatives, preview_request, SlideContext, PreviewConfig};
use crate::prompts::{self, SlideScope};
use crate::artifacts::slide_outline;

pub mod replies {
    pub const YOGA_SUGGESTIONS: &str = include_str!("../fixtures/replies/yoga_suggestions.txt");
    pub const YOGA_OUTLINE: &str = include_str!("../fixtures/replies/yoga_outline.txt");
    pub const YOGA_DECK: &str = include_str!("../fixtures/replies/yoga_deck.txt");
    pub const KAYAKING_OUTLINE: &str = include_str!("../fixtures/replies/kayaking_outline.txt");
    pub const KAYAKING_DECK: &str = include_str!("../fixtures/replies/kayaking_deck.txt");
    pub const KAYAKING_SLIDE2_GROUNDING: &str = include_str!("../fixtures/replies/kayaking_slide2_grounding.txt");
    pub const KAYAKING_SLIDE2_VARIATION: &str = include_str!("../fixtures/replies/kayaking_slide2_variation.txt");
    pub const MARIE_CURIE_GROUNDING: &str = include_str!("../fixtures/replies/marie_curie_grounding.txt");
    pub const TYPOGRAPHY_SLIDER: &str = include_str!("../fixtures/replies/typography_slider.txt");
    pub const COLORSCHEME_SLIDER: &str = include_str!("../fixtures/replies/colorscheme_slider.txt");
    pub const TYPOGRAPHY_ALTERNATIVES: &str = include_str!("../fixtures/replies/typography_alternatives.txt");
    pub const COLORSCHEME_ALTERNATIVES: &str = include_str!("../fixtures/replies/colorscheme_alternatives.txt");
    pub const TESLA_OUTLINE: &str = include_str!("../fixtures/replies/tesla_outline.txt");
    pub const TESLA_DECK: &str = include_str!("../fixtures/replies/tesla_deck.txt");
}

pub const IMAGE_SEARCH_FIXTURE: &str = include_str!("../fixtures/search/images.json");
pub const OCEAN_TEMPLATE: &[u8] = include_bytes!("../fixtures/decks/ocean_template.json");
pub const TESLA_DOCX: &[u8] = include_bytes!("../fixtures/docs/tesla.docx");
/// The checked-in store, as produced by [`build_replay_store`].
pub const REPLAY_STORE_JSON: &str = include_str!("../fixtures/replay/demo.json");

pub const MARIE_CURIE: &str = "Marie Curie for teenagers";
/// Slide of the kayaking deck opened in the overlay scenario.
pub const KAYAKING_SESSION_SLIDE: u32 = 2;
pub const COLOR_OVERRIDE: &str = "blue, red, and white";
pub const KAYAK_IMAGE: &str = "https://images.example.org/kayak-river.jpg";

fn inside(board: &TagBoard, group: GroupName) -> Position {
    board.group(group).center
}

fn add(board: &mut TagBoard, label: &str, value: &str, group: GroupName) -> TagId {
    let p = inside(board, group);
    board.create_tag(label, value, Some(group), p).expect("demo tag").id.clone()
}

pub fn yoga_board() -> TagBoard {
    let mut b = TagBoard::new("yoga");
    add(&mut b, "Topic", "Yoga for stress relief", GroupName::Narrative);
    add(&mut b, "Purpose", "Workshop introduction", GroupName::Narrative);
    add(&mut b, "Mood", "Calm", GroupName::VisualStyle);
    b.drain_events();
    b
}

pub fn kayaking_board() -> TagBoard {
    let mut b = TagBoard::new("kayaking");
    add(&mut b, "Topic", "Kayaking", GroupName::Narrative);
    add(&mut b, "Audience", "Beginners", GroupName::Narrative);
    add(&mut b, "Number of Slides", "7", GroupName::VisualStyle);
    add(&mut b, "Color", "Ocean blues", GroupName::VisualStyle);
    let p = inside(&b, GroupName::ContentSources);
    b.add_reference(
        ReferenceTag {
            kind: ReferenceKind::Image,
            source: KAYAK_IMAGE.into(),
            selection: None,
        },
        Some(GroupName::ContentSources),
        p,
        TagOrigin::User,
    )
    .expect("demo reference");
    b.drain_events();
    b
}

/// Board for the slider and drop-down scenarios.
pub fn style_board() -> TagBoard {
    let mut b = TagBoard::new("style");
    add(&mut b, "Topic", "Kayaking", GroupName::Narrative);
    add(&mut b, "Typography", "Modern", GroupName::VisualStyle);
    add(&mut b, "ColorScheme", "Dark and Light Blue", GroupName::VisualStyle);
    b.drain_events();
    b
}

pub fn find_tag(board: &TagBoard, label: &str) -> Option<TagId> {
    board
        .tags()
        .iter()
        .find(|t| t.concept().is_some_and(|c| c.label == label))
        .map(|t| t.id.clone())
}

/// Tesla board: the docx with only its second section selected, plus the
/// ocean template, both active in Content Sources.
pub fn tesla_workspace() -> Result<(TagBoard, AssetStore), IngestError> {
    let mut b = TagBoard::new("tesla");
    add(&mut b, "Topic", "Tesla company overview", GroupName::Narrative);
    let mut assets = AssetStore::new();
    let doc = import_docx(TESLA_DOCX, Some("Tesla.docx"))?;
    let p = inside(&b, GroupName::ContentSources);
    let doc_tag = attach_document(&mut b, &mut assets, doc, Some(GroupName::ContentSources), p)?;
    select_sections(&mut b, &assets, &doc_tag, &["s2".to_string()])?;
    let template = import_deck_template(OCEAN_TEMPLATE, "Ocean")?;
    let tpl_tag = attach_template(&mut b, &mut assets, template)?;
    let p = b.inside_position(GroupName::ContentSources, 1, 2);
    b.move_tag(&tpl_tag, p, Some(GroupName::ContentSources))?;
    b.drain_events();
    Ok((b, assets))
}

/// The overlay edit: the grounded `Color` tag is overridden.
pub fn color_override(scoped: &mut TagBoard) -> Option<TagId> {
    let id = find_tag(scoped, "Color")?;
    scoped.edit_tag(&id, "Color", COLOR_OVERRIDE).ok()?;
    Some(id)
}

pub fn mock_image_search() -> MockImageSearch {
    MockImageSearch::from_json(IMAGE_SEARCH_FIXTURE.as_bytes()).expect("bundled fixture parses")
}

pub fn replay_store() -> ReplayStore {
    ReplayStore::from_json(REPLAY_STORE_JSON.as_bytes()).expect("bundled store parses")
}

pub fn replay_backend() -> Arc<ReplayBackend> {
    Arc::new(ReplayBackend::new(replay_store()))
}

/// A preview reply: the context slide with a palette or typeface derived
/// from the option.
fn preview_reply(ctx: &SlideContext, option: &str) -> String {
    let mut slide = serde_json::to_value(&ctx.slide).expect("slide serializes");
    let palettes: HashMap<&str, [&str; 3]> = HashMap::from([
        ("Teal and Coral", ["#0F4C5C", "#FF6F59", "#E8F6F3"]),
        ("Purple and Yellow", ["#4B2E83", "#FFC857", "#F7F3FF"]),
        ("Green and Gold", ["#1B4332", "#D4A373", "#F1F8F4"]),
        ("Black and White", ["#000000", "#555555", "#FFFFFF"]),
        ("Navy and Orange", ["#14213D", "#FCA311", "#F8F9FA"]),
    ]);
    let fonts: HashMap<&str, &str> = HashMap::from([
        ("Classic", "\"Merriweather\", serif"),
        ("Playful", "\"Quicksand\", sans-serif"),
        ("Minimalist", "\"Roboto\", sans-serif"),
        ("Bold", "\"Montserrat\", sans-serif"),
        ("Elegant", "\"Playfair Display\", serif"),
    ]);
    if let Some([p, s, t]) = palettes.get(option) {
        slide["theme"]["colors"] = json!({"primary": p, "secondary": s, "tertiary": t});
    }
    if let Some(f) = fonts.get(option) {
        slide["theme"]["fonts"]["header"] = json!(f);
    }
    serde_json::to_string_pretty(&Value::Array(vec![slide])).expect("json")
}

/// Runs every scenario against the canned replies and returns the store
/// that answers all of their requests.
pub async fn build_replay_store() -> Result<ReplayStore, PipelineError> {
    let mut store = ReplayStore::new();
    let assets = AssetStore::new();
    macro_rules! pipeline {
        () => {
            Pipeline::new(Arc::new(ReplayBackend::new(store.clone())))
        };
    }

    // Yoga: suggestions, outline, deck.
    let yoga = yoga_board();
    store.insert_request(
        &prompts::build_suggestion_prompt(&yoga, &assets)?.into(),
        replies::YOGA_SUGGESTIONS,
    );
    store.insert_request(&prompts::build_outline_prompt(&yoga, &assets)?.into(), replies::YOGA_OUTLINE);
    let outline = pipeline!().outline_reply(&yoga, &assets).await?;
    store.insert_request(
        &prompts::build_deck_prompt(&outline.markdown, &yoga, &assets, None)?.into(),
        replies::YOGA_DECK,
    );

    // Kayaking: outline, deck, slide session, one variation.
    let kayaking = kayaking_board();
    store.insert_request(
        &prompts::build_outline_prompt(&kayaking, &assets)?.into(),
        replies::KAYAKING_OUTLINE,
    );
    let outline = pipeline!().outline_reply(&kayaking, &assets).await?;
    store.insert_request(
        &prompts::build_deck_prompt(&outline.markdown, &kayaking, &assets, None)?.into(),
        replies::KAYAKING_DECK,
    );
    let deck: SlideDeck = pipeline!().deck_reply(&kayaking, &assets, &outline.markdown, None).await?.deck;
    let slide = deck.slide(KAYAKING_SESSION_SLIDE).expect("slide exists").clone();
    store.insert_request(
        &prompts::build_slide_grounding_text_prompt(&slide)?.into(),
        replies::KAYAKING_SLIDE2_GROUNDING,
    );
    let mut session = pipeline!().open_slide_session(&deck, KAYAKING_SESSION_SLIDE).await?;
    color_override(&mut session.scoped_board);
    let scope = SlideScope {
        slide_number: KAYAKING_SESSION_SLIDE,
        variation: None,
    };
    store.insert_request(
        &prompts::build_single_slide_prompt(&slide_outline(&slide), &session.scoped_board, &assets, None, scope)?.into(),
        replies::KAYAKING_SLIDE2_VARIATION,
    );

    // Text grounding.
    store.insert_request(
        &prompts::build_text_grounding_prompt(MARIE_CURIE)?.into(),
        replies::MARIE_CURIE_GROUNDING,
    );

    // Slider and drop-down, with previews on the kayaking title slide.
    let style = style_board();
    let ctx = SlideContext::for_deck(&deck, None).expect("deck has slides");
    let n = PreviewConfig::default().alternatives;
    for (label, slider, alternatives) in [
        ("Typography", replies::TYPOGRAPHY_SLIDER, replies::TYPOGRAPHY_ALTERNATIVES),
        ("ColorScheme", replies::COLORSCHEME_SLIDER, replies::COLORSCHEME_ALTERNATIVES),
    ] {
        let id = find_tag(&style, label).expect("style tag");
        let tag = style.tag(&id)?;
        store.insert_request(&prompts::build_slider_prompt(tag, &style, &assets)?.into(), slider);
        store.insert_request(
            &prompts::build_alternatives_prompt(tag, &style, &assets, n)?.into(),
            alternatives,
        );
        let current = &tag.concept().expect("concept").value;
        let options = parse_alternatives(&serde_json::from_str(alternatives).expect("fixture JSON"), current, n)?;
        for option in options {
            let req: CompletionRequest = preview_request(&id, &option, &style, &assets, &ctx)
                .map_err(|e| PipelineError::Capability(e.to_string()))?;
            store.insert_request(&req, preview_reply(&ctx, &option));
        }
    }

    // Tesla: document selection and deck template.
    let (tesla, tesla_assets) = tesla_workspace().map_err(|e| PipelineError::Capability(e.to_string()))?;
    store.insert_request(
        &prompts::build_outline_prompt(&tesla, &tesla_assets)?.into(),
        replies::TESLA_OUTLINE,
    );
    let outline = pipeline!().outline_reply(&tesla, &tesla_assets).await?;
    store.insert_request(
        &prompts::build_deck_prompt(&outline.markdown, &tesla, &tesla_assets, tesla_assets.active_template(&tesla))?.into(),
        replies::TESLA_DECK,
    );

    Ok(store)
}
