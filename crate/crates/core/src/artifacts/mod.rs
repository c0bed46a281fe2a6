//! Generated artifacts: the markdown outline and the JSON slide deck.

pub mod deck;
pub mod outline;
pub mod render;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use deck::{
    slides_from_json, validate_deck, Colors, FontSizes, Fonts, Layout, Rule, Slide, SlideContent,
    SlideDeck, Theme, Violation, FONT_FAMILIES,
};
pub use outline::{parse_outline, serialize_outline, Outline, OutlineItem, OutlineSection};
pub use render::{render_deck, render_deck_annotated, render_slide};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArtifactError {
    #[error("deck shape error: {0}")]
    Shape(String),
    #[error("deck has {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
}

/// Visual style lifted from a reference deck. The full deck JSON is kept so
/// it can be embedded in deck prompts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeckTemplate {
    /// One theme per slide, in slide order.
    pub themes: Vec<Theme>,
    /// Distinct background images in order of first use.
    pub background_images: Vec<String>,
    pub deck: Vec<Slide>,
}

impl DeckTemplate {
    pub fn deck_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.deck).expect("slides serialize")
    }

    pub fn first_slide(&self) -> Option<&Slide> {
        self.deck.first()
    }
}

pub fn extract_template(deck: &SlideDeck) -> Result<DeckTemplate, ArtifactError> {
    let violations = validate_deck(&deck.to_json())?;
    if !violations.is_empty() {
        return Err(ArtifactError::Invalid(violations));
    }
    let mut background_images: Vec<String> = Vec::new();
    for bg in deck.slides.iter().filter_map(|s| s.content.background_image.as_ref()) {
        if !background_images.contains(bg) {
            background_images.push(bg.clone());
        }
    }
    Ok(DeckTemplate {
        themes: deck.slides.iter().map(|s| s.theme.clone()).collect(),
        background_images,
        deck: deck.slides.clone(),
    })
}

/// Copies `source`'s theme and background image onto every slide. Layout and
/// all other content stay as they are; the deck revision is bumped.
pub fn restyle_deck(deck: &SlideDeck, source: &Slide) -> SlideDeck {
    let slides = deck
        .slides
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.theme = source.theme.clone();
            s.content.background_image = source.content.background_image.clone();
            s
        })
        .collect();
    SlideDeck {
        deck_id: deck.deck_id.clone(),
        revision: deck.revision + 1,
        slides,
    }
}

/// A one-section outline describing a single slide, used to scope deck
/// prompts to that slide.
pub fn slide_outline(slide: &Slide) -> String {
    let c = &slide.content;
    let mut items = Vec::new();
    if let Some(sub) = &c.subtitle {
        items.push(OutlineItem::Paragraph { text: sub.clone() });
    }
    if let Some(list) = &c.list {
        items.extend(list.iter().map(|b| OutlineItem::Bullet {
            level: 0,
            text: b.clone(),
        }));
    }
    if let Some(p) = &c.paragraph {
        items.push(OutlineItem::Paragraph { text: p.clone() });
    }
    if let Some(img) = &c.image {
        items.push(OutlineItem::Image {
            alt: String::new(),
            url: render::plain_url(img).to_string(),
        });
    }
    serialize_outline(&[OutlineSection {
        title: c.title.clone().unwrap_or_default(),
        items,
    }])
}

/// Reads a single-slide reply: either a one-element array or a bare object.
pub fn single_slide_from_json(value: &Value, slide_number: u32) -> Result<(Slide, Vec<Violation>), ArtifactError> {
    let mut item = match value {
        Value::Array(items) if items.len() == 1 => items[0].clone(),
        Value::Array(items) => {
            return Err(ArtifactError::Shape(format!(
                "expected exactly one slide, got {}",
                items.len()
            )))
        }
        obj @ Value::Object(_) => obj.clone(),
        _ => return Err(ArtifactError::Shape("slide reply is not JSON".into())),
    };
    if let Some(obj) = item.as_object_mut() {
        obj.insert("slideNumber".into(), Value::from(1));
    }
    let wrapped = Value::Array(vec![item]);
    let violations = validate_deck(&wrapped)?
        .into_iter()
        .map(|mut v| {
            v.slide_number = slide_number;
            v
        })
        .collect();
    let mut slide = slides_from_json(&wrapped)?.remove(0);
    slide.slide_number = slide_number;
    Ok((slide, violations))
}
