//! The steering canvas: intent tags, the three fixed tag groups, and board
//! persistence.
//!
//! A tag is active exactly when it sits inside one of the groups. Every
//! mutation bumps the board revision and stamps the touched tag with it, so
//! tag revisions are strictly increasing and never reused on a board.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BOARD_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoardError {
    #[error("tag {0} not found")]
    NotFound(TagId),
    #[error("an active tag needs a non-empty value")]
    EmptyActiveValue,
    #[error("tag {0} is not a concept tag")]
    NotAConcept(TagId),
    #[error("tag {0} is not a document reference")]
    NotADocument(TagId),
    #[error("malformed board JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported board schema version {found} (expected {BOARD_SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("duplicate tag id {0}")]
    DuplicateId(TagId),
}

/// One of the three fixed buckets on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupName {
    Narrative,
    VisualStyle,
    ContentSources,
}

impl GroupName {
    pub const ALL: [GroupName; 3] = [
        GroupName::Narrative,
        GroupName::VisualStyle,
        GroupName::ContentSources,
    ];

    /// Bucket name as it appears in prompts and model replies.
    pub fn bucket_label(self) -> &'static str {
        match self {
            GroupName::Narrative => "Narrative",
            GroupName::VisualStyle => "Visual Style",
            GroupName::ContentSources => "Content Sources",
        }
    }

    pub fn from_bucket_label(label: &str) -> Option<GroupName> {
        GroupName::ALL.into_iter().find(|g| g.bucket_label() == label)
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.bucket_label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TagId(pub String);

impl TagId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TagId {
    fn from(s: &str) -> Self {
        TagId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagOrigin {
    User,
    Suggested,
    Grounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ReferenceKind {
    Document,
    Image,
    DeckTemplate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptTag {
    pub label: String,
    pub value: String,
}

impl ConceptTag {
    pub fn new(label: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            value: value.into(),
        }
    }

    /// `label:value`, or the bare value when there is no label.
    pub fn micro_prompt(&self) -> String {
        if self.label.is_empty() {
            self.value.clone()
        } else {
            format!("{}:{}", self.label, self.value)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceTag {
    pub kind: ReferenceKind,
    /// Remote URI or the id of an ingested asset.
    pub source: String,
    /// Selected section ids; documents only. `None` means the whole document.
    pub selection: Option<Vec<String>>,
}

impl ReferenceTag {
    /// True when `source` names an ingested asset rather than a remote URI.
    pub fn is_asset_id(&self) -> bool {
        !(self.source.contains("://") || self.source.starts_with("data:"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagBody {
    Concept(ConceptTag),
    Reference(ReferenceTag),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tag {
    pub id: TagId,
    pub body: TagBody,
    pub group: Option<GroupName>,
    pub position: Position,
    pub origin: TagOrigin,
    pub revision: u64,
}

impl Tag {
    pub fn is_active(&self) -> bool {
        self.group.is_some()
    }

    pub fn concept(&self) -> Option<&ConceptTag> {
        match &self.body {
            TagBody::Concept(c) => Some(c),
            TagBody::Reference(_) => None,
        }
    }

    pub fn reference(&self) -> Option<&ReferenceTag> {
        match &self.body {
            TagBody::Reference(r) => Some(r),
            TagBody::Concept(_) => None,
        }
    }

    fn has_value(&self) -> bool {
        match &self.body {
            TagBody::Concept(c) => !c.value.is_empty(),
            TagBody::Reference(r) => !r.source.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagGroup {
    pub name: GroupName,
    pub center: Position,
    pub radius: f64,
}

impl TagGroup {
    pub fn contains(&self, p: &Position) -> bool {
        self.center.distance(p) <= self.radius
    }
}

/// Default canvas geometry: three non-overlapping circles.
pub fn default_groups() -> Vec<TagGroup> {
    vec![
        TagGroup {
            name: GroupName::Narrative,
            center: Position::new(300.0, 300.0),
            radius: 200.0,
        },
        TagGroup {
            name: GroupName::VisualStyle,
            center: Position::new(900.0, 300.0),
            radius: 200.0,
        },
        TagGroup {
            name: GroupName::ContentSources,
            center: Position::new(600.0, 820.0),
            radius: 200.0,
        },
    ]
}

/// Emitted by mutations so the preview cache can follow along.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoardEvent {
    TagChanged { tag_id: TagId, revision: u64 },
    TagDeleted { tag_id: TagId },
}

#[derive(Debug, Clone)]
pub struct TagBoard {
    pub board_id: String,
    groups: Vec<TagGroup>,
    tags: Vec<Tag>,
    pub outline_ref: Option<String>,
    pub deck_ref: Option<String>,
    board_revision: u64,
    next_seq: u64,
    events: Vec<BoardEvent>,
}

// Pending events and the id counter are session state, not board content.
impl PartialEq for TagBoard {
    fn eq(&self, other: &Self) -> bool {
        self.board_id == other.board_id
            && self.groups == other.groups
            && self.tags == other.tags
            && self.outline_ref == other.outline_ref
            && self.deck_ref == other.deck_ref
            && self.board_revision == other.board_revision
    }
}

impl TagBoard {
    pub fn new(board_id: impl Into<String>) -> Self {
        Self {
            board_id: board_id.into(),
            groups: default_groups(),
            tags: Vec::new(),
            outline_ref: None,
            deck_ref: None,
            board_revision: 0,
            next_seq: 1,
            events: Vec::new(),
        }
    }

    pub fn revision(&self) -> u64 {
        self.board_revision
    }

    pub fn groups(&self) -> &[TagGroup] {
        &self.groups
    }

    pub fn group(&self, name: GroupName) -> &TagGroup {
        self.groups
            .iter()
            .find(|g| g.name == name)
            .expect("boards always carry all three groups")
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn tag(&self, id: &TagId) -> Result<&Tag, BoardError> {
        self.tags
            .iter()
            .find(|t| &t.id == id)
            .ok_or_else(|| BoardError::NotFound(id.clone()))
    }

    fn tag_index(&self, id: &TagId) -> Result<usize, BoardError> {
        self.tags
            .iter()
            .position(|t| &t.id == id)
            .ok_or_else(|| BoardError::NotFound(id.clone()))
    }

    /// Group whose circle contains `p`. Borders count as inside.
    pub fn group_at(&self, p: &Position) -> Option<GroupName> {
        self.groups.iter().find(|g| g.contains(p)).map(|g| g.name)
    }

    /// Takes the events produced since the last drain.
    pub fn drain_events(&mut self) -> Vec<BoardEvent> {
        std::mem::take(&mut self.events)
    }

    fn bump(&mut self) -> u64 {
        self.board_revision += 1;
        self.board_revision
    }

    fn fresh_id(&mut self) -> TagId {
        loop {
            let id = TagId(format!("tag-{}", self.next_seq));
            self.next_seq += 1;
            if !self.tags.iter().any(|t| t.id == id) {
                return id;
            }
        }
    }

    fn insert(
        &mut self,
        body: TagBody,
        group: Option<GroupName>,
        position: Position,
        origin: TagOrigin,
    ) -> Result<&Tag, BoardError> {
        let id = self.fresh_id();
        let tag = Tag {
            id,
            body,
            group,
            position,
            origin,
            revision: 0,
        };
        if tag.is_active() && !tag.has_value() {
            return Err(BoardError::EmptyActiveValue);
        }
        let revision = self.bump();
        self.tags.push(Tag { revision, ..tag });
        Ok(self.tags.last().expect("just pushed"))
    }

    /// Creates a user tag. An empty floating tag is the "New Tag" draft state.
    pub fn create_tag(
        &mut self,
        label: &str,
        value: &str,
        group: Option<GroupName>,
        position: Position,
    ) -> Result<&Tag, BoardError> {
        self.create_tag_with_origin(label, value, group, position, TagOrigin::User)
    }

    pub fn create_tag_with_origin(
        &mut self,
        label: &str,
        value: &str,
        group: Option<GroupName>,
        position: Position,
        origin: TagOrigin,
    ) -> Result<&Tag, BoardError> {
        self.insert(
            TagBody::Concept(ConceptTag::new(label, value)),
            group,
            position,
            origin,
        )
    }

    pub fn add_reference(
        &mut self,
        reference: ReferenceTag,
        group: Option<GroupName>,
        position: Position,
        origin: TagOrigin,
    ) -> Result<&Tag, BoardError> {
        self.insert(TagBody::Reference(reference), group, position, origin)
    }

    /// Moves a tag. Entering a group activates it, leaving all groups
    /// deactivates it.
    pub fn move_tag(
        &mut self,
        id: &TagId,
        position: Position,
        group: Option<GroupName>,
    ) -> Result<&Tag, BoardError> {
        let idx = self.tag_index(id)?;
        if group.is_some() && !self.tags[idx].has_value() {
            return Err(BoardError::EmptyActiveValue);
        }
        let revision = self.bump();
        let tag = &mut self.tags[idx];
        tag.position = position;
        tag.group = group;
        tag.revision = revision;
        self.events.push(BoardEvent::TagChanged {
            tag_id: id.clone(),
            revision,
        });
        Ok(&self.tags[idx])
    }

    /// Replaces label and value verbatim. Identical text still bumps the
    /// revision and emits an invalidation.
    pub fn edit_tag(&mut self, id: &TagId, label: &str, value: &str) -> Result<&Tag, BoardError> {
        let idx = self.tag_index(id)?;
        let tag = &self.tags[idx];
        if tag.concept().is_none() {
            return Err(BoardError::NotAConcept(id.clone()));
        }
        if tag.is_active() && value.is_empty() {
            return Err(BoardError::EmptyActiveValue);
        }
        let revision = self.bump();
        let tag = &mut self.tags[idx];
        tag.body = TagBody::Concept(ConceptTag::new(label, value));
        tag.revision = revision;
        self.events.push(BoardEvent::TagChanged {
            tag_id: id.clone(),
            revision,
        });
        Ok(&self.tags[idx])
    }

    pub fn delete_tag(&mut self, id: &TagId) -> Result<Tag, BoardError> {
        let idx = self.tag_index(id)?;
        self.bump();
        let removed = self.tags.remove(idx);
        self.events.push(BoardEvent::TagDeleted { tag_id: id.clone() });
        Ok(removed)
    }

    /// Stores a section selection mask on a document reference.
    pub fn set_selection(
        &mut self,
        id: &TagId,
        selection: Option<Vec<String>>,
    ) -> Result<&Tag, BoardError> {
        let idx = self.tag_index(id)?;
        match &self.tags[idx].body {
            TagBody::Reference(r) if r.kind == ReferenceKind::Document => {}
            _ => return Err(BoardError::NotADocument(id.clone())),
        }
        let revision = self.bump();
        let tag = &mut self.tags[idx];
        if let TagBody::Reference(r) = &mut tag.body {
            r.selection = selection;
        }
        tag.revision = revision;
        self.events.push(BoardEvent::TagChanged {
            tag_id: id.clone(),
            revision,
        });
        Ok(&self.tags[idx])
    }

    pub fn link_outline(&mut self, outline_id: Option<String>) {
        self.bump();
        self.outline_ref = outline_id;
    }

    pub fn link_deck(&mut self, deck_id: Option<String>) {
        self.bump();
        self.deck_ref = deck_id;
    }

    /// Active tags per group in insertion order. All three groups are always
    /// present, possibly empty.
    pub fn active_tags_by_group(&self) -> BTreeMap<GroupName, Vec<&Tag>> {
        let mut out: BTreeMap<GroupName, Vec<&Tag>> =
            GroupName::ALL.into_iter().map(|g| (g, Vec::new())).collect();
        for tag in &self.tags {
            if let Some(g) = tag.group {
                out.entry(g).or_default().push(tag);
            }
        }
        out
    }

    /// Active concept `(label, value)` pairs, across all groups.
    pub fn active_concepts(&self) -> impl Iterator<Item = (&Tag, &ConceptTag)> {
        self.tags
            .iter()
            .filter(|t| t.is_active())
            .filter_map(|t| t.concept().map(|c| (t, c)))
    }

    /// A canvas point outside every group circle, on a ring around `near`.
    /// `slot` spreads successive floats around the ring.
    pub fn float_position(&self, near: GroupName, slot: usize, slots: usize) -> Position {
        let group = self.group(near);
        let slots = slots.max(1) as f64;
        let angle = std::f64::consts::TAU * (slot as f64) / slots;
        let mut ring = group.radius + 70.0;
        loop {
            let p = Position::new(
                group.center.x + ring * angle.cos(),
                group.center.y + ring * angle.sin(),
            );
            if self.group_at(&p).is_none() {
                return p;
            }
            ring += 40.0;
        }
    }

    /// A point inside the circle of `group`, spread by `slot` over `slots`.
    pub fn inside_position(&self, group: GroupName, slot: usize, slots: usize) -> Position {
        let g = self.group(group);
        let slots = slots.max(1) as f64;
        let angle = std::f64::consts::TAU * (slot as f64) / slots;
        let ring = g.radius * 0.6;
        Position::new(g.center.x + ring * angle.cos(), g.center.y + ring * angle.sin())
    }

    /// Asset ids referenced by tags that `known` does not recognize.
    pub fn dangling_references(&self, known: impl Fn(&str) -> bool) -> Vec<DanglingReference> {
        self.tags
            .iter()
            .filter_map(|t| {
                let r = t.reference()?;
                (r.is_asset_id() && !known(&r.source)).then(|| DanglingReference {
                    tag_id: t.id.clone(),
                    source: r.source.clone(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DanglingReference {
    pub tag_id: TagId,
    pub source: String,
}

/// Splits on the first colon. Without a colon the whole text is the value.
pub fn parse_attr_value(text: &str) -> (String, String) {
    match text.split_once(':') {
        Some((label, value)) => (label.trim().to_string(), value.trim().to_string()),
        None => (String::new(), text.trim().to_string()),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BoardFile {
    schema_version: u32,
    board_id: String,
    groups: Vec<TagGroup>,
    tags: Vec<TagRecord>,
    outline_ref: Option<String>,
    deck_ref: Option<String>,
    board_revision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
enum RecordKind {
    Concept,
    Document,
    Image,
    DeckTemplate,
}

#[derive(Serialize, Deserialize)]
struct TagRecord {
    id: TagId,
    kind: RecordKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(default)]
    selection: Option<Vec<String>>,
    group: Option<GroupName>,
    position: Position,
    origin: TagOrigin,
    revision: u64,
}

impl From<&Tag> for TagRecord {
    fn from(t: &Tag) -> Self {
        let (kind, label, value, source, selection) = match &t.body {
            TagBody::Concept(c) => (
                RecordKind::Concept,
                Some(c.label.clone()),
                Some(c.value.clone()),
                None,
                None,
            ),
            TagBody::Reference(r) => (
                match r.kind {
                    ReferenceKind::Document => RecordKind::Document,
                    ReferenceKind::Image => RecordKind::Image,
                    ReferenceKind::DeckTemplate => RecordKind::DeckTemplate,
                },
                None,
                None,
                Some(r.source.clone()),
                r.selection.clone(),
            ),
        };
        TagRecord {
            id: t.id.clone(),
            kind,
            label,
            value,
            source,
            selection,
            group: t.group,
            position: t.position,
            origin: t.origin,
            revision: t.revision,
        }
    }
}

impl From<TagRecord> for Tag {
    fn from(r: TagRecord) -> Self {
        let body = match r.kind {
            RecordKind::Concept => TagBody::Concept(ConceptTag {
                label: r.label.unwrap_or_default(),
                value: r.value.unwrap_or_default(),
            }),
            kind => TagBody::Reference(ReferenceTag {
                kind: match kind {
                    RecordKind::Document => ReferenceKind::Document,
                    RecordKind::Image => ReferenceKind::Image,
                    _ => ReferenceKind::DeckTemplate,
                },
                source: r.source.unwrap_or_default(),
                selection: r.selection,
            }),
        };
        Tag {
            id: r.id,
            body,
            group: r.group,
            position: r.position,
            origin: r.origin,
            revision: r.revision,
        }
    }
}

impl Serialize for TagBoard {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BoardFile {
            schema_version: BOARD_SCHEMA_VERSION,
            board_id: self.board_id.clone(),
            groups: self.groups.clone(),
            tags: self.tags.iter().map(TagRecord::from).collect(),
            outline_ref: self.outline_ref.clone(),
            deck_ref: self.deck_ref.clone(),
            board_revision: self.board_revision,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TagBoard {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = BoardFile::deserialize(deserializer)?;
        TagBoard::from_file(file).map_err(D::Error::custom)
    }
}

impl TagBoard {
    fn from_file(file: BoardFile) -> Result<Self, BoardError> {
        if file.schema_version != BOARD_SCHEMA_VERSION {
            return Err(BoardError::SchemaVersion {
                found: file.schema_version,
            });
        }
        let mut names: Vec<GroupName> = file.groups.iter().map(|g| g.name).collect();
        names.sort();
        names.dedup();
        let groups = if names.len() == 3 && file.groups.len() == 3 {
            file.groups
        } else {
            // Missing or repeated groups fall back to the fixed layout.
            default_groups()
        };
        let tags: Vec<Tag> = file.tags.into_iter().map(Tag::from).collect();
        for (i, t) in tags.iter().enumerate() {
            if tags[..i].iter().any(|o| o.id == t.id) {
                return Err(BoardError::DuplicateId(t.id.clone()));
            }
        }
        let next_seq = tags
            .iter()
            .filter_map(|t| t.id.0.strip_prefix("tag-")?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        Ok(TagBoard {
            board_id: file.board_id,
            groups,
            tags,
            outline_ref: file.outline_ref,
            deck_ref: file.deck_ref,
            board_revision: file.board_revision,
            next_seq,
            events: Vec::new(),
        })
    }
}

pub fn serialize_board(board: &TagBoard) -> Vec<u8> {
    serde_json::to_vec_pretty(board).expect("board serialization is infallible")
}

pub fn deserialize_board(bytes: &[u8]) -> Result<TagBoard, BoardError> {
    let file: BoardFile = serde_json::from_slice(bytes).map_err(|e| BoardError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    TagBoard::from_file(file)
}

/// Deserializes and reports tags pointing at assets `known` does not have.
pub fn deserialize_board_checked(
    bytes: &[u8],
    known: impl Fn(&str) -> bool,
) -> Result<(TagBoard, Vec<DanglingReference>), BoardError> {
    let board = deserialize_board(bytes)?;
    let dangling = board.dangling_references(known);
    Ok((board, dangling))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> Position {
        Position::new(x, y)
    }

    #[test]
    fn create_active_tags() {
        let mut b = TagBoard::new("b");
        let t = b
            .create_tag("Topic", "Product launch", Some(GroupName::Narrative), at(300.0, 300.0))
            .unwrap()
            .clone();
        assert!(t.is_active());
        assert_eq!(t.origin, TagOrigin::User);
        assert_eq!(t.concept().unwrap().micro_prompt(), "Topic:Product launch");
        let f = b
            .create_tag("Font", "Modern", Some(GroupName::VisualStyle), at(900.0, 300.0))
            .unwrap();
        assert_eq!(f.group, Some(GroupName::VisualStyle));
        assert_eq!(b.revision(), 2);
    }

    #[test]
    fn empty_draft_floats() {
        let mut b = TagBoard::new("b");
        let t = b.create_tag("", "", None, at(0.0, 0.0)).unwrap();
        assert!(!t.is_active());
        assert_eq!(
            b.create_tag("", "", Some(GroupName::Narrative), at(0.0, 0.0)),
            Err(BoardError::EmptyActiveValue)
        );
        // a failed create does not bump the revision
        assert_eq!(b.revision(), 1);
    }

    #[test]
    fn move_activates_and_deactivates() {
        let mut b = TagBoard::new("b");
        let id = b
            .create_tag_with_origin("Audience", "Beginners", None, at(0.0, 0.0), TagOrigin::Suggested)
            .unwrap()
            .id
            .clone();
        let moved = b.move_tag(&id, at(300.0, 300.0), Some(GroupName::Narrative)).unwrap();
        assert!(moved.is_active());
        assert_eq!(moved.origin, TagOrigin::Suggested);
        assert_eq!(b.active_tags_by_group()[&GroupName::Narrative].len(), 1);

        let r1 = b.tag(&id).unwrap().revision;
        b.move_tag(&id, at(310.0, 290.0), Some(GroupName::Narrative)).unwrap();
        let t = b.tag(&id).unwrap();
        assert_eq!(t.group, Some(GroupName::Narrative));
        assert!(t.revision > r1);

        b.move_tag(&id, at(5000.0, 5000.0), None).unwrap();
        assert!(b.active_tags_by_group().values().all(|v| v.is_empty()));

        assert_eq!(
            b.move_tag(&TagId::from("nope"), at(0.0, 0.0), None),
            Err(BoardError::NotFound(TagId::from("nope")))
        );
    }

    #[test]
    fn edit_is_verbatim_and_always_bumps() {
        let mut b = TagBoard::new("b");
        let id = b
            .create_tag("Topic", "cycling for fitness", Some(GroupName::Narrative), at(0.0, 0.0))
            .unwrap()
            .id
            .clone();
        b.drain_events();
        b.edit_tag(&id, "Topic", "cycling for environmental benefit").unwrap();
        let r = b.tag(&id).unwrap().revision;
        b.edit_tag(&id, "Topic", "cycling for environmental benefit").unwrap();
        assert!(b.tag(&id).unwrap().revision > r);
        let events = b.drain_events();
        assert_eq!(events.len(), 2);
        assert!(matches!(&events[1], BoardEvent::TagChanged { tag_id, .. } if tag_id == &id));

        b.edit_tag(&id, " spaced: ", "Teal, and: Coral ").unwrap();
        let c = b.tag(&id).unwrap().concept().unwrap();
        assert_eq!(c.label, " spaced: ");
        assert_eq!(c.value, "Teal, and: Coral ");
    }

    #[test]
    fn delete_emits_event() {
        let mut b = TagBoard::new("b");
        let id = b.create_tag("a", "b", None, at(0.0, 0.0)).unwrap().id.clone();
        b.drain_events();
        b.delete_tag(&id).unwrap();
        assert_eq!(b.drain_events(), vec![BoardEvent::TagDeleted { tag_id: id.clone() }]);
        assert!(b.tag(&id).is_err());
        // fresh ids never collide with a deleted one's successor
        let id2 = b.create_tag("c", "d", None, at(0.0, 0.0)).unwrap().id.clone();
        assert_ne!(id, id2);
    }

    #[test]
    fn parse_attr_value_examples() {
        assert_eq!(parse_attr_value("Tone:Encouraging"), ("Tone".into(), "Encouraging".into()));
        assert_eq!(parse_attr_value("Encouraging"), ("".into(), "Encouraging".into()));
        assert_eq!(parse_attr_value("Time: 10:30 AM"), ("Time".into(), "10:30 AM".into()));
        assert_eq!(parse_attr_value(""), ("".into(), "".into()));
    }

    #[test]
    fn active_tags_groups_always_present() {
        let mut b = TagBoard::new("b");
        assert_eq!(b.active_tags_by_group().len(), 3);
        b.create_tag("a", "1", Some(GroupName::Narrative), at(0.0, 0.0)).unwrap();
        b.create_tag("b", "2", Some(GroupName::Narrative), at(0.0, 0.0)).unwrap();
        b.create_tag("c", "3", Some(GroupName::VisualStyle), at(0.0, 0.0)).unwrap();
        b.create_tag_with_origin("d", "4", None, at(0.0, 0.0), TagOrigin::Suggested).unwrap();
        let m = b.active_tags_by_group();
        assert_eq!(m[&GroupName::Narrative].len(), 2);
        assert_eq!(m[&GroupName::VisualStyle].len(), 1);
        assert!(m[&GroupName::ContentSources].is_empty());
        let order: Vec<_> = m[&GroupName::Narrative]
            .iter()
            .map(|t| t.concept().unwrap().label.as_str())
            .collect();
        assert_eq!(order, ["a", "b"]);
    }

    #[test]
    fn float_positions_are_outside_groups() {
        let b = TagBoard::new("b");
        for g in GroupName::ALL {
            for slot in 0..21 {
                let p = b.float_position(g, slot, 21);
                assert_eq!(b.group_at(&p), None, "{g:?} slot {slot}");
            }
        }
    }

    #[test]
    fn border_counts_as_inside() {
        let b = TagBoard::new("b");
        let g = b.group(GroupName::Narrative);
        let p = Position::new(g.center.x + g.radius, g.center.y);
        assert_eq!(b.group_at(&p), Some(GroupName::Narrative));
    }

    #[test]
    fn empty_board_round_trip() {
        let b = TagBoard::new("empty");
        let bytes = serialize_board(&b);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["groups"].as_array().unwrap().len(), 3);
        assert_eq!(v["tags"].as_array().unwrap().len(), 0);
        assert_eq!(v["schemaVersion"], 1);
        assert_eq!(deserialize_board(&bytes).unwrap(), b);
    }

    #[test]
    fn malformed_bytes_report_location() {
        let err = deserialize_board(b"{\n  \"boardId\": ").unwrap_err();
        assert!(matches!(err, BoardError::Parse { line: 2, .. }), "{err:?}");
        let future = br#"{"schemaVersion":9,"boardId":"b","groups":[],"tags":[],"outlineRef":null,"deckRef":null,"boardRevision":0}"#;
        assert_eq!(
            deserialize_board(future).unwrap_err(),
            BoardError::SchemaVersion { found: 9 }
        );
    }

    #[test]
    fn dangling_asset_reference_is_reported() {
        let mut b = TagBoard::new("b");
        b.add_reference(
            ReferenceTag {
                kind: ReferenceKind::Image,
                source: "img-missing".into(),
                selection: None,
            },
            Some(GroupName::ContentSources),
            at(600.0, 820.0),
            TagOrigin::User,
        )
        .unwrap();
        b.add_reference(
            ReferenceTag {
                kind: ReferenceKind::Image,
                source: "https://example.com/a.png".into(),
                selection: None,
            },
            None,
            at(0.0, 0.0),
            TagOrigin::Suggested,
        )
        .unwrap();
        let bytes = serialize_board(&b);
        let (back, dangling) = deserialize_board_checked(&bytes, |_| false).unwrap();
        assert_eq!(back, b);
        assert_eq!(dangling.len(), 1);
        assert_eq!(dangling[0].source, "img-missing");
    }
}
