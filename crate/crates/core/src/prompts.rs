//! Prompt assembly.
//!
//! Every request pairs a static system prompt (stored verbatim under
//! `fixtures/prompts/`) with a user context rendered from the board. The user
//! context lists active tags per group, one line per group, always in the
//! order Narrative, Visual Style, Content Sources.

use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifacts::{DeckTemplate, Slide};
use crate::board::{GroupName, ReferenceKind, ReferenceTag, Tag, TagBoard, TagBody};
use crate::ingest::AssetStore;

/// Static system prompts.
pub mod fixtures {
    pub const SUGGESTIONS: &str = include_str!("../fixtures/prompts/suggestions.txt");
    pub const OUTLINE: &str = include_str!("../fixtures/prompts/outline.txt");
    pub const DECK: &str = include_str!("../fixtures/prompts/deck.txt");
    pub const SLIDE_GROUNDING: &str = include_str!("../fixtures/prompts/slide_grounding.txt");
    pub const TEXT_GROUNDING: &str = include_str!("../fixtures/prompts/text_grounding.txt");
    pub const SLIDER: &str = include_str!("../fixtures/prompts/slider.txt");
    pub const ALTERNATIVES: &str = include_str!("../fixtures/prompts/alternatives.txt");
}

/// Upper bound on a rendered user context.
pub const MAX_USER_CONTEXT_BYTES: usize = 512 * 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("the outline is empty")]
    EmptyOutline,
    #[error("the text to ground is empty")]
    EmptyText,
    #[error("tag {0} is not active")]
    InactiveTag(String),
    #[error("tag {0} is not a concept tag")]
    NotAConcept(String),
    #[error("slide image is not decodable: {0}")]
    BadImage(String),
    #[error("prompt context is {0} bytes, above the {MAX_USER_CONTEXT_BYTES} byte limit")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Purpose {
    Suggestions,
    Outline,
    Deck,
    SlideGrounding,
    TextGrounding,
    SliderSpec,
    Alternatives,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Suggestions => "suggestions",
            Purpose::Outline => "outline",
            Purpose::Deck => "deck",
            Purpose::SlideGrounding => "slideGrounding",
            Purpose::TextGrounding => "textGrounding",
            Purpose::SliderSpec => "sliderSpec",
            Purpose::Alternatives => "alternatives",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageAttachment {
    pub mime: String,
    /// Base64 of the image bytes.
    pub data: String,
}

impl ImageAttachment {
    pub fn data_url(&self) -> String {
        format!("data:{};base64,{}", self.mime, self.data)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PromptBundle {
    pub system_prompt: String,
    pub user_context: String,
    #[serde(default)]
    pub attachments: Vec<ImageAttachment>,
    pub purpose: Purpose,
}

fn bundle(system: &str, user_context: String, purpose: Purpose) -> Result<PromptBundle, PromptError> {
    if user_context.len() > MAX_USER_CONTEXT_BYTES {
        return Err(PromptError::TooLarge(user_context.len()));
    }
    Ok(PromptBundle {
        system_prompt: system.to_string(),
        user_context,
        attachments: Vec::new(),
        purpose,
    })
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn render_reference(r: &ReferenceTag, assets: &AssetStore) -> Option<String> {
    match r.kind {
        ReferenceKind::Image => {
            let url = match assets.image(&r.source) {
                Some(img) => img.prompt_url(),
                None => r.source.clone(),
            };
            Some(format!("ImageUrl:{url}"))
        }
        ReferenceKind::Document => {
            let Some(doc) = assets.document(&r.source) else {
                return Some(format!("UserDocument:{}", r.source));
            };
            let mut out = format!("UserDocument:{}", one_line(&doc.title));
            for section in &doc.sections {
                let included = r
                    .selection
                    .as_ref()
                    .is_none_or(|sel| sel.iter().any(|id| id == &section.section_id));
                if !included {
                    continue;
                }
                if !section.heading.is_empty() {
                    out.push_str(&format!(" [{}]", one_line(&section.heading)));
                }
                if !section.body.is_empty() {
                    out.push(' ');
                    out.push_str(&one_line(&section.body));
                }
            }
            Some(out)
        }
        // Templates travel as their own prompt block.
        ReferenceKind::DeckTemplate => None,
    }
}

fn render_tag(tag: &Tag, assets: &AssetStore) -> Option<String> {
    match &tag.body {
        TagBody::Concept(c) => Some(c.micro_prompt()),
        TagBody::Reference(r) => render_reference(r, assets),
    }
}

/// The three `**Group** label:value, ...` lines.
pub fn render_user_context(board: &TagBoard, assets: &AssetStore) -> String {
    let grouped = board.active_tags_by_group();
    GroupName::ALL
        .iter()
        .map(|g| {
            let items: Vec<String> = grouped[g]
                .iter()
                .filter_map(|t| render_tag(t, assets))
                .collect();
            if items.is_empty() {
                format!("**{}**", g.bucket_label())
            } else {
                format!("**{}** {}", g.bucket_label(), items.join(", "))
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn build_suggestion_prompt(board: &TagBoard, assets: &AssetStore) -> Result<PromptBundle, PromptError> {
    bundle(
        fixtures::SUGGESTIONS,
        render_user_context(board, assets),
        Purpose::Suggestions,
    )
}

pub fn build_outline_prompt(board: &TagBoard, assets: &AssetStore) -> Result<PromptBundle, PromptError> {
    bundle(
        fixtures::OUTLINE,
        render_user_context(board, assets),
        Purpose::Outline,
    )
}

fn deck_context(outline: &str, board: &TagBoard, assets: &AssetStore, template: Option<&DeckTemplate>) -> Result<String, PromptError> {
    if outline.trim().is_empty() {
        return Err(PromptError::EmptyOutline);
    }
    let mut ctx = format!(
        "PRESENTATION OUTLINE:\n{}\n\nMETA INFORMATION:\n{}",
        outline.trim_end(),
        render_user_context(board, assets)
    );
    if let Some(t) = template {
        ctx.push_str("\n\nREFERENCE SLIDE DECK TEMPLATE:\n");
        ctx.push_str(&t.deck_json_pretty());
    }
    Ok(ctx)
}

pub fn build_deck_prompt(
    outline: &str,
    board: &TagBoard,
    assets: &AssetStore,
    template: Option<&DeckTemplate>,
) -> Result<PromptBundle, PromptError> {
    bundle(
        fixtures::DECK,
        deck_context(outline, board, assets, template)?,
        Purpose::Deck,
    )
}

/// Restricts a deck prompt to one slide, optionally as variation `index` of
/// `count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlideScope {
    pub slide_number: u32,
    pub variation: Option<(u32, u32)>,
}

pub fn build_single_slide_prompt(
    slide_outline: &str,
    board: &TagBoard,
    assets: &AssetStore,
    template: Option<&DeckTemplate>,
    scope: SlideScope,
) -> Result<PromptBundle, PromptError> {
    let mut ctx = deck_context(slide_outline, board, assets, template)?;
    ctx.push_str(&format!(
        "\n\nSLIDE SCOPE:\nReturn a JSON array with exactly one slide, slide number {}.",
        scope.slide_number
    ));
    if let Some((index, count)) = scope.variation {
        ctx.push_str(&format!(
            " This is variation {index} of {count}; make it clearly distinct from the other variations."
        ));
    }
    bundle(fixtures::DECK, ctx, Purpose::Deck)
}

/// Grounding from a rendered slide image (PNG or JPEG).
pub fn build_slide_grounding_prompt(slide_image: &[u8]) -> Result<PromptBundle, PromptError> {
    if slide_image.is_empty() {
        return Err(PromptError::BadImage("no image bytes".into()));
    }
    let format =
        image::guess_format(slide_image).map_err(|e| PromptError::BadImage(e.to_string()))?;
    let mime = match format {
        image::ImageFormat::Png => "image/png",
        image::ImageFormat::Jpeg => "image/jpeg",
        other => return Err(PromptError::BadImage(format!("{other:?} is not supported"))),
    };
    image::load_from_memory_with_format(slide_image, format)
        .map_err(|e| PromptError::BadImage(e.to_string()))?;
    let mut b = bundle(fixtures::SLIDE_GROUNDING, String::new(), Purpose::SlideGrounding)?;
    b.attachments.push(ImageAttachment {
        mime: mime.to_string(),
        data: base64::engine::general_purpose::STANDARD.encode(slide_image),
    });
    Ok(b)
}

/// Grounding fallback without a rasterizer: the slide JSON as text.
pub fn build_slide_grounding_text_prompt(slide: &Slide) -> Result<PromptBundle, PromptError> {
    let json = serde_json::to_string_pretty(slide).expect("slide serializes");
    bundle(
        fixtures::SLIDE_GROUNDING,
        format!("SLIDE (JSON instead of an image):\n{json}"),
        Purpose::SlideGrounding,
    )
}

pub fn build_text_grounding_prompt(free_text: &str) -> Result<PromptBundle, PromptError> {
    if free_text.trim().is_empty() {
        return Err(PromptError::EmptyText);
    }
    bundle(
        fixtures::TEXT_GROUNDING,
        free_text.to_string(),
        Purpose::TextGrounding,
    )
}

fn selected_attribute(tag: &Tag) -> Result<String, PromptError> {
    if !tag.is_active() {
        return Err(PromptError::InactiveTag(tag.id.to_string()));
    }
    tag.concept()
        .map(|c| c.micro_prompt())
        .ok_or_else(|| PromptError::NotAConcept(tag.id.to_string()))
}

pub fn build_slider_prompt(tag: &Tag, board: &TagBoard, assets: &AssetStore) -> Result<PromptBundle, PromptError> {
    let selected = selected_attribute(tag)?;
    bundle(
        fixtures::SLIDER,
        format!(
            "SELECTED ATTRIBUTE:\n{selected}\n\nPRESENTATION ATTRIBUTES:\n{}",
            render_user_context(board, assets)
        ),
        Purpose::SliderSpec,
    )
}

pub fn build_alternatives_prompt(
    tag: &Tag,
    board: &TagBoard,
    assets: &AssetStore,
    count: usize,
) -> Result<PromptBundle, PromptError> {
    let selected = selected_attribute(tag)?;
    bundle(
        fixtures::ALTERNATIVES,
        format!(
            "SELECTED ATTRIBUTE:\n{selected}\n\nNUMBER OF ALTERNATIVES: {count}\n\nPRESENTATION ATTRIBUTES:\n{}",
            render_user_context(board, assets)
        ),
        Purpose::Alternatives,
    )
}
