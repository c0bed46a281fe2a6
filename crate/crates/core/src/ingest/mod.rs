//! External content: Word documents, images, image search, deck templates.

pub mod docx;
pub mod search;

use std::collections::BTreeMap;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::artifacts::{extract_template, render_slide, slides_from_json, ArtifactError, DeckTemplate, SlideDeck};
use crate::board::{BoardError, GroupName, Position, ReferenceKind, ReferenceTag, TagBoard, TagId, TagOrigin};

pub use docx::{import_docx, DocSection, IngestedDocument};
pub use search::{
    image_query, BingImageSearch, DisabledImageSearch, ImageHit, ImageSearchClient, ImageSuggester, ImageSuggestions,
    MockImageSearch, BING_ENDPOINT, RESULTS_PER_SEARCH,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("corrupt document: {0}")]
    Corrupt(String),
    #[error("import failed: {0}")]
    Import(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("unknown section id {0:?}")]
    UnknownSection(String),
    #[error("unknown asset {0:?}")]
    UnknownAsset(String),
    #[error("image search failed: {0}")]
    Search(String),
    #[error(transparent)]
    Board(#[from] BoardError),
}

fn short_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))[..12].to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageSourceKind {
    Upload,
    Search,
}

mod b64 {
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<u8>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(bytes) => s.serialize_some(&base64::engine::general_purpose::STANDARD.encode(bytes)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<u8>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| {
                base64::engine::general_purpose::STANDARD
                    .decode(s)
                    .map_err(serde::de::Error::custom)
            })
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ImageAsset {
    pub asset_id: String,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default, with = "b64", skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<u8>>,
    #[serde(default)]
    pub mime: Option<String>,
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub height: Option<u32>,
    pub source_kind: ImageSourceKind,
}

impl ImageAsset {
    pub fn remote(url: String, width: Option<u32>, height: Option<u32>, source_kind: ImageSourceKind) -> Self {
        Self {
            asset_id: format!("img-{}", short_hash(url.as_bytes())),
            url: Some(url),
            data: None,
            mime: None,
            width,
            height,
            source_kind,
        }
    }

    /// Address used in prompts and slides.
    pub fn prompt_url(&self) -> String {
        self.url
            .clone()
            .unwrap_or_else(|| format!("asset:{}", self.asset_id))
    }

    /// Stored bytes as a `data:` URI, if any.
    pub fn data_uri(&self) -> Option<String> {
        let data = self.data.as_ref()?;
        let mime = self.mime.as_deref().unwrap_or("application/octet-stream");
        Some(format!(
            "data:{mime};base64,{}",
            base64::engine::general_purpose::STANDARD.encode(data)
        ))
    }

    /// Neither a url nor stored bytes: nothing can be shown.
    pub fn is_broken(&self) -> bool {
        self.url.is_none() && self.data.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TemplateAsset {
    pub asset_id: String,
    pub name: String,
    pub template: DeckTemplate,
    /// HTML rendering of the first slide.
    pub thumbnail_html: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Asset {
    Document(IngestedDocument),
    Image(ImageAsset),
    DeckTemplate(TemplateAsset),
}

impl Asset {
    pub fn id(&self) -> &str {
        match self {
            Asset::Document(d) => &d.doc_id,
            Asset::Image(i) => &i.asset_id,
            Asset::DeckTemplate(t) => &t.asset_id,
        }
    }
}

/// Assets of one project, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AssetStore {
    assets: BTreeMap<String, Asset>,
}

impl AssetStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, asset: Asset) -> String {
        let id = asset.id().to_string();
        self.assets.insert(id.clone(), asset);
        id
    }

    pub fn get(&self, id: &str) -> Option<&Asset> {
        self.assets.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.assets.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Asset> {
        self.assets.values()
    }

    pub fn document(&self, id: &str) -> Option<&IngestedDocument> {
        match self.assets.get(id)? {
            Asset::Document(d) => Some(d),
            _ => None,
        }
    }

    pub fn image(&self, id: &str) -> Option<&ImageAsset> {
        match self.assets.get(id)? {
            Asset::Image(i) => Some(i),
            _ => None,
        }
    }

    pub fn template(&self, id: &str) -> Option<&TemplateAsset> {
        match self.assets.get(id)? {
            Asset::DeckTemplate(t) => Some(t),
            _ => None,
        }
    }

    /// Image assets whose content is gone.
    pub fn missing_blobs(&self) -> Vec<String> {
        self.assets
            .values()
            .filter_map(|a| match a {
                Asset::Image(i) if i.is_broken() => Some(i.asset_id.clone()),
                _ => None,
            })
            .collect()
    }

    /// The template of the first active deck-template reference, if any.
    pub fn active_template(&self, board: &TagBoard) -> Option<&DeckTemplate> {
        board
            .tags()
            .iter()
            .filter(|t| t.is_active())
            .filter_map(|t| t.reference())
            .filter(|r| r.kind == ReferenceKind::DeckTemplate)
            .find_map(|r| self.template(&r.source))
            .map(|t| &t.template)
    }
}

/// Stores an uploaded PNG or JPEG. `url` is where the service will serve it.
pub fn import_image(bytes: &[u8], url: Option<String>) -> Result<ImageAsset, IngestError> {
    let format = image::guess_format(bytes)
        .map_err(|_| IngestError::UnsupportedFormat("images must be PNG or JPEG".into()))?;
    let mime = match format {
        image::ImageFormat::Png => "image/png",
        image::ImageFormat::Jpeg => "image/jpeg",
        other => {
            return Err(IngestError::UnsupportedFormat(format!(
                "{other:?} images are not supported; use PNG or JPEG"
            )))
        }
    };
    let (width, height) = image::ImageReader::with_format(std::io::Cursor::new(bytes), format)
        .into_dimensions()
        .map_err(|e| IngestError::Import(format!("undecodable image: {e}")))?;
    Ok(ImageAsset {
        asset_id: format!("img-{}", short_hash(bytes)),
        url,
        data: Some(bytes.to_vec()),
        mime: Some(mime.into()),
        width: Some(width),
        height: Some(height),
        source_kind: ImageSourceKind::Upload,
    })
}

/// Reads a reference deck in this tool's deck JSON (a slide array, or a
/// `{"slides": [...]}` deck object).
pub fn import_deck_template(bytes: &[u8], name: &str) -> Result<TemplateAsset, IngestError> {
    if bytes.starts_with(b"PK\x03\x04") {
        return Err(IngestError::UnsupportedFormat(
            "PowerPoint/ZIP files are not supported; import a deck template JSON file".into(),
        ));
    }
    let value: Value = serde_json::from_slice(bytes).map_err(|e| {
        IngestError::UnsupportedFormat(format!("expected deck template JSON: {e}"))
    })?;
    let slides_json = match &value {
        Value::Array(_) => value.clone(),
        Value::Object(o) if o.get("slides").is_some_and(Value::is_array) => o["slides"].clone(),
        _ => {
            return Err(IngestError::Import(
                "JSON is not a slide deck (expected an array of slides)".into(),
            ))
        }
    };
    if slides_json.as_array().is_some_and(|a| a.is_empty()) {
        return Err(IngestError::Import("template deck has no slides".into()));
    }
    let slides = slides_from_json(&slides_json).map_err(|e| IngestError::Import(e.to_string()))?;
    let deck = SlideDeck::new(name, slides);
    let template = extract_template(&deck).map_err(|e| match e {
        ArtifactError::Invalid(v) => IngestError::Import(format!(
            "template deck is invalid: {}",
            v.iter().map(|v| v.detail.as_str()).collect::<Vec<_>>().join("; ")
        )),
        other => IngestError::Import(other.to_string()),
    })?;
    let thumbnail_html = template.first_slide().map(render_slide).unwrap_or_default();
    Ok(TemplateAsset {
        asset_id: format!("tpl-{}", short_hash(bytes)),
        name: name.to_string(),
        template,
        thumbnail_html,
    })
}

/// Imports a document and places it on the board as a reference tag.
pub fn attach_document(
    board: &mut TagBoard,
    assets: &mut AssetStore,
    doc: IngestedDocument,
    group: Option<GroupName>,
    position: Position,
) -> Result<TagId, IngestError> {
    let source = assets.insert(Asset::Document(doc));
    let tag = board.add_reference(
        ReferenceTag {
            kind: ReferenceKind::Document,
            source,
            selection: None,
        },
        group,
        position,
        TagOrigin::User,
    )?;
    Ok(tag.id.clone())
}

pub fn attach_image(
    board: &mut TagBoard,
    assets: &mut AssetStore,
    image: ImageAsset,
    group: Option<GroupName>,
    position: Position,
    origin: TagOrigin,
) -> Result<TagId, IngestError> {
    let source = assets.insert(Asset::Image(image));
    let tag = board.add_reference(
        ReferenceTag {
            kind: ReferenceKind::Image,
            source,
            selection: None,
        },
        group,
        position,
        origin,
    )?;
    Ok(tag.id.clone())
}

/// Adds the template as a floating Content Sources reference.
pub fn attach_template(
    board: &mut TagBoard,
    assets: &mut AssetStore,
    template: TemplateAsset,
) -> Result<TagId, IngestError> {
    let position = board.float_position(GroupName::ContentSources, 0, 1);
    let source = assets.insert(Asset::DeckTemplate(template));
    let tag = board.add_reference(
        ReferenceTag {
            kind: ReferenceKind::DeckTemplate,
            source,
            selection: None,
        },
        None,
        position,
        TagOrigin::User,
    )?;
    Ok(tag.id.clone())
}

/// Turns search results into floating image tags around Content Sources.
pub fn apply_image_suggestions(
    board: &mut TagBoard,
    assets: &mut AssetStore,
    suggestions: &ImageSuggestions,
) -> Result<Vec<TagId>, IngestError> {
    let n = suggestions.assets.len();
    suggestions
        .assets
        .iter()
        .enumerate()
        .map(|(i, asset)| {
            let position = board.float_position(GroupName::ContentSources, i, n);
            attach_image(board, assets, asset.clone(), None, position, TagOrigin::Suggested)
        })
        .collect()
}

/// Restricts a document reference to `section_ids`. An empty list keeps only
/// the document title in prompts.
pub fn select_sections(
    board: &mut TagBoard,
    assets: &AssetStore,
    tag_id: &TagId,
    section_ids: &[String],
) -> Result<(), IngestError> {
    let tag = board.tag(tag_id)?;
    let source = match tag.reference() {
        Some(r) if r.kind == ReferenceKind::Document => r.source.clone(),
        _ => return Err(BoardError::NotADocument(tag_id.clone()).into()),
    };
    let doc = assets
        .document(&source)
        .ok_or_else(|| IngestError::UnknownAsset(source.clone()))?;
    if let Some(bad) = section_ids.iter().find(|id| doc.section(id).is_none()) {
        return Err(IngestError::UnknownSection(bad.clone()));
    }
    board.set_selection(tag_id, Some(section_ids.to_vec()))?;
    Ok(())
}
