//! Slide-deck JSON: typed slides, themes, and schema validation.
//!
//! Validation works on the raw JSON so that decks the model got wrong can
//! still be inspected. It reports every violation and never repairs.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use super::ArtifactError;

/// Font families the generator may choose from.
pub const FONT_FAMILIES: [&str; 6] = [
    "Quicksand",
    "Playfair Display",
    "Montserrat",
    "Merriweather",
    "Roboto",
    "Roboto Condensed",
];

pub const MAX_BULLETS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Layout {
    Title,
    ListOrParagraph,
    VerticalImage,
    FullImage,
    /// Anything outside the enumerated set; only ever produced by lenient parsing.
    Other(String),
}

impl Layout {
    pub const KNOWN: [&'static str; 4] = ["title", "listOrParagraph", "verticalImage", "fullImage"];

    pub fn as_str(&self) -> &str {
        match self {
            Layout::Title => "title",
            Layout::ListOrParagraph => "listOrParagraph",
            Layout::VerticalImage => "verticalImage",
            Layout::FullImage => "fullImage",
            Layout::Other(s) => s,
        }
    }

    pub fn parse(s: &str) -> Layout {
        match s {
            "title" => Layout::Title,
            "listOrParagraph" => Layout::ListOrParagraph,
            "verticalImage" => Layout::VerticalImage,
            "fullImage" => Layout::FullImage,
            other => Layout::Other(other.to_string()),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Layout {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Layout {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Layout::parse(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlideContent {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtitle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_image: Option<String>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Fonts {
    #[serde(default)]
    pub header: String,
    #[serde(default)]
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Colors {
    #[serde(default)]
    pub primary: String,
    #[serde(default)]
    pub secondary: String,
    #[serde(default)]
    pub tertiary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FontSizes {
    #[serde(default)]
    pub h1: String,
    #[serde(default)]
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Theme {
    #[serde(default)]
    pub fonts: Fonts,
    #[serde(default)]
    pub colors: Colors,
    #[serde(default)]
    pub font_sizes: FontSizes,
    /// Spacing scale; units are unspecified so it is carried opaquely.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub space: Value,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Slide {
    pub slide_number: u32,
    pub layout: Layout,
    #[serde(default)]
    pub content: SlideContent,
    #[serde(default)]
    pub theme: Theme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlideDeck {
    pub deck_id: String,
    pub revision: u64,
    pub slides: Vec<Slide>,
}

impl SlideDeck {
    pub fn new(deck_id: impl Into<String>, slides: Vec<Slide>) -> Self {
        Self {
            deck_id: deck_id.into(),
            revision: 1,
            slides,
        }
    }

    pub fn slide(&self, number: u32) -> Option<&Slide> {
        self.slides.iter().find(|s| s.slide_number == number)
    }

    /// The deck as the bare slide array used in prompts and on the wire.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.slides).expect("slides serialize")
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(&self.slides).expect("slides serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    /// 1-based position of the offending slide in the array.
    pub slide_number: u32,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Rule {
    SlideShape,
    SlideNumber,
    LayoutEnum,
    Content,
    ContentShape,
    MaxBullets,
    Theme,
    FontFamily,
    Space,
}

/// Leading family of a CSS font stack, unquoted.
pub fn leading_font_family(stack: &str) -> &str {
    stack
        .split(',')
        .next()
        .unwrap_or("")
        .trim()
        .trim_matches(|c| c == '"' || c == '\'')
        .trim()
}

pub fn is_known_font(stack: &str) -> bool {
    FONT_FAMILIES.contains(&leading_font_family(stack))
}

/// Checks a deck against the slide schema. Errors only when the input is not
/// an array at all.
pub fn validate_deck(deck: &Value) -> Result<Vec<Violation>, ArtifactError> {
    let slides = deck
        .as_array()
        .ok_or_else(|| ArtifactError::Shape("a slide deck must be a JSON array".into()))?;
    let mut out = Vec::new();
    for (i, slide) in slides.iter().enumerate() {
        validate_slide_at(slide, i as u32 + 1, &mut out);
    }
    Ok(out)
}

/// Validates one slide expected at 1-based `position`.
pub fn validate_slide_at(slide: &Value, position: u32, out: &mut Vec<Violation>) {
    let mut push = |rule, detail: String| {
        out.push(Violation {
            slide_number: position,
            rule,
            detail,
        })
    };
    let Some(obj) = slide.as_object() else {
        push(Rule::SlideShape, "slide is not a JSON object".into());
        return;
    };

    match obj.get("slideNumber").and_then(Value::as_u64) {
        Some(n) if n == u64::from(position) => {}
        Some(n) => push(
            Rule::SlideNumber,
            format!("slideNumber {n} where {position} was expected"),
        ),
        None => push(Rule::SlideNumber, "missing or non-integer slideNumber".into()),
    }

    let layout = obj.get("layout").and_then(Value::as_str);
    match layout {
        Some(l) if Layout::KNOWN.contains(&l) => {}
        Some(l) => push(Rule::LayoutEnum, format!("unknown layout {l:?}")),
        None => push(Rule::LayoutEnum, "missing layout".into()),
    }

    match obj.get("content").and_then(Value::as_object) {
        None => push(Rule::Content, "missing content object".into()),
        Some(content) => {
            let has = |k: &str| content.get(k).is_some_and(|v| !v.is_null());
            let list = content.get("list").filter(|v| !v.is_null());
            if let Some(list) = list {
                match list.as_array() {
                    Some(items) if items.iter().all(Value::is_string) => {
                        if items.len() > MAX_BULLETS {
                            push(
                                Rule::MaxBullets,
                                format!("{} bullets, at most {MAX_BULLETS} allowed", items.len()),
                            );
                        }
                    }
                    _ => push(Rule::ContentShape, "list must be an array of strings".into()),
                }
            }
            match layout {
                Some("title") if has("list") || has("paragraph") => push(
                    Rule::ContentShape,
                    "title layout takes no list or paragraph".into(),
                ),
                Some(l @ ("listOrParagraph" | "verticalImage")) if has("list") == has("paragraph") => {
                    push(
                        Rule::ContentShape,
                        format!("{l} needs exactly one of list or paragraph"),
                    )
                }
                Some("fullImage") if !has("image") && !has("backgroundImage") => push(
                    Rule::ContentShape,
                    "fullImage needs an image or backgroundImage".into(),
                ),
                _ => {}
            }
        }
    }

    match obj.get("theme").and_then(Value::as_object) {
        None => push(Rule::Theme, "missing theme object".into()),
        Some(theme) => {
            for (section, keys) in [
                ("fonts", &["header", "text"][..]),
                ("colors", &["primary", "secondary", "tertiary"][..]),
                ("fontSizes", &["h1", "text"][..]),
            ] {
                let Some(part) = theme.get(section).and_then(Value::as_object) else {
                    push(Rule::Theme, format!("theme.{section} missing"));
                    continue;
                };
                for key in keys {
                    match part.get(*key).and_then(Value::as_str) {
                        None => push(Rule::Theme, format!("theme.{section}.{key} missing")),
                        Some(font) if section == "fonts" && !is_known_font(font) => push(
                            Rule::FontFamily,
                            format!("theme.fonts.{key} {font:?} is not one of the six families"),
                        ),
                        Some(_) => {}
                    }
                }
            }
            if let Some(space) = theme.get("space") {
                let ok = space
                    .as_array()
                    .is_some_and(|a| a.len() == 3 && a.iter().all(|v| v.is_i64() || v.is_u64()));
                if !ok {
                    push(Rule::Space, "theme.space must be a list of 3 integers".into());
                }
            }
        }
    }
}

/// Lenient conversion of a deck array into typed slides. Run
/// [`validate_deck`] to learn what is wrong with them.
pub fn slides_from_json(deck: &Value) -> Result<Vec<Slide>, ArtifactError> {
    let items = deck
        .as_array()
        .ok_or_else(|| ArtifactError::Shape("a slide deck must be a JSON array".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| slide_from_json(v, i as u32 + 1))
        .collect()
}

fn slide_from_json(v: &Value, position: u32) -> Result<Slide, ArtifactError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ArtifactError::Shape(format!("slide {position} is not an object")))?;
    let slide_number = obj
        .get("slideNumber")
        .and_then(Value::as_u64)
        .and_then(|n| u32::try_from(n).ok())
        .unwrap_or(position);
    let layout = Layout::parse(obj.get("layout").and_then(Value::as_str).unwrap_or(""));
    let content = match obj.get("content") {
        Some(c) => serde_json::from_value(c.clone())
            .map_err(|e| ArtifactError::Shape(format!("slide {position} content: {e}")))?,
        None => SlideContent::default(),
    };
    let theme = match obj.get("theme") {
        Some(t) => serde_json::from_value(t.clone())
            .map_err(|e| ArtifactError::Shape(format!("slide {position} theme: {e}")))?,
        None => Theme::default(),
    };
    Ok(Slide {
        slide_number,
        layout,
        content,
        theme,
    })
}
