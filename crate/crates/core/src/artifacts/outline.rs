//! Markdown presentation outlines.
//!
//! Parsing is line based and total: headings open sections, list items become
//! bullets, image-only lines become images, everything else is kept as
//! paragraph text. Serialization emits the canonical form (`## ` headings,
//! `- ` bullets indented two spaces per level).

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static HEADING: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^#{1,6}(?:\s+(.*))?$").unwrap());
static BULLET: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[-*+]|\d{1,9}[.)])\s+(\S.*)$").unwrap());
static IMAGE_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^!\[([^\]]*)\]\(\s*([^\s)]+)(?:\s+"[^"]*")?\s*\)$"#).unwrap()
});
static INLINE_IMAGE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"!\[[^\]]*\]\(\s*([^\s)]+)[^)]*\)").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum OutlineItem {
    Bullet { level: usize, text: String },
    Image { alt: String, url: String },
    Paragraph { text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineSection {
    pub title: String,
    pub items: Vec<OutlineItem>,
}

impl OutlineSection {
    pub fn bullets(&self) -> Vec<&str> {
        self.items
            .iter()
            .filter_map(|i| match i {
                OutlineItem::Bullet { text, .. } => Some(text.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Image urls, standalone or inline in text, in document order.
    pub fn images(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for item in &self.items {
            match item {
                OutlineItem::Image { url, .. } => out.push(url.as_str()),
                OutlineItem::Bullet { text, .. } | OutlineItem::Paragraph { text } => out.extend(
                    INLINE_IMAGE
                        .captures_iter(text)
                        .map(|c| c.get(1).unwrap().as_str()),
                ),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub id: String,
    pub markdown: String,
    pub sections: Vec<OutlineSection>,
    pub revision: u64,
}

impl Outline {
    pub fn from_markdown(id: impl Into<String>, markdown: impl Into<String>) -> Self {
        let markdown = markdown.into();
        Self {
            id: id.into(),
            sections: parse_outline(&markdown),
            markdown,
            revision: 1,
        }
    }

    /// Manual edit: replaces the text and bumps the revision.
    pub fn edit(&mut self, markdown: impl Into<String>) {
        self.markdown = markdown.into();
        self.sections = parse_outline(&self.markdown);
        self.revision += 1;
    }

    pub fn all_images(&self) -> Vec<&str> {
        self.sections.iter().flat_map(|s| s.images()).collect()
    }
}

pub fn parse_outline(markdown: &str) -> Vec<OutlineSection> {
    let mut sections: Vec<OutlineSection> = Vec::new();
    for raw in markdown.lines() {
        let line = raw.trim_end();
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(c) = HEADING.captures(trimmed) {
            let title = c.get(1).map_or("", |m| m.as_str()).trim().to_string();
            sections.push(OutlineSection {
                title,
                items: Vec::new(),
            });
            continue;
        }
        let item = if let Some(c) = BULLET.captures(trimmed) {
            let indent: usize = line
                .chars()
                .take_while(|c| c.is_whitespace())
                .map(|c| if c == '\t' { 4 } else { 1 })
                .sum();
            let text = c[1].trim().to_string();
            match image_line(&text) {
                Some(img) => img,
                None => OutlineItem::Bullet {
                    level: indent / 2,
                    text,
                },
            }
        } else if let Some(img) = image_line(trimmed) {
            img
        } else {
            OutlineItem::Paragraph {
                text: trimmed.to_string(),
            }
        };
        if sections.is_empty() {
            sections.push(OutlineSection {
                title: String::new(),
                items: Vec::new(),
            });
        }
        sections.last_mut().unwrap().items.push(item);
    }
    sections
}

fn image_line(text: &str) -> Option<OutlineItem> {
    IMAGE_LINE.captures(text).map(|c| OutlineItem::Image {
        alt: c[1].to_string(),
        url: c[2].to_string(),
    })
}

pub fn serialize_outline(sections: &[OutlineSection]) -> String {
    let mut blocks = Vec::with_capacity(sections.len());
    for (i, section) in sections.iter().enumerate() {
        let mut lines = Vec::new();
        let implicit_preamble = i == 0 && section.title.is_empty() && !section.items.is_empty();
        if !implicit_preamble {
            if section.title.is_empty() {
                lines.push("##".to_string());
            } else {
                lines.push(format!("## {}", section.title));
            }
        }
        for item in &section.items {
            lines.push(match item {
                OutlineItem::Bullet { level, text } => format!("{}- {}", "  ".repeat(*level), text),
                OutlineItem::Image { alt, url } => format!("![{alt}]({url})"),
                OutlineItem::Paragraph { text } => text.clone(),
            });
        }
        blocks.push(lines.join("\n"));
    }
    let mut out = blocks.join("\n\n");
    out.push('\n');
    out
}
