//! Strategies and invariant checks shared by the property tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use serde_json::{json, Value};

use tagdeck::artifacts::{
    parse_outline, restyle_deck, serialize_outline, Colors, Fonts, Layout, Slide, SlideContent, SlideDeck, Theme,
};
use tagdeck::board::{
    deserialize_board, serialize_board, GroupName, Position, ReferenceKind, ReferenceTag, TagBoard, TagId,
    TagOrigin,
};
use tagdeck::llm::parse_grounding;
use tagdeck::pipeline::{apply_grounded, apply_style_to_deck, apply_suggestions, apply_variation, dedup_drafts, ScopedSlideSession};
use tagdeck::preview::{parse_slider, Begin, Lookup, PreviewCache, PreviewKind, SLIDER_STEPS};

pub type Check = Result<(), TestCaseError>;

pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[A-Za-z ]{0,12}",
        "[a-zé😀\"\\\\ ,:\\[\\]]{0,10}",
        Just(String::new()),
    ]
}

pub fn value_text() -> impl Strategy<Value = String> {
    "[A-Za-zü0-9 ,.'-]{1,16}"
}

pub fn group() -> impl Strategy<Value = Option<GroupName>> {
    prop_oneof![
        Just(None),
        Just(Some(GroupName::Narrative)),
        Just(Some(GroupName::VisualStyle)),
        Just(Some(GroupName::ContentSources)),
    ]
}

#[derive(Debug, Clone)]
pub enum BoardOp {
    Create(String, String, Option<GroupName>, f64, f64),
    Reference(u8, String, Option<GroupName>, Option<Vec<String>>),
    Move(usize, Option<GroupName>, f64, f64),
    Edit(usize, String, String),
    Delete(usize),
    Link(Option<String>),
}

pub fn board_op() -> impl Strategy<Value = BoardOp> {
    prop_oneof![
        4 => (text(), value_text(), group(), -500.0..1500.0f64, -500.0..1500.0f64)
            .prop_map(|(l, v, g, x, y)| BoardOp::Create(l, v, g, x, y)),
        1 => (0u8..3, "[a-z0-9:/._-]{1,20}", group(), proptest::option::of(proptest::collection::vec("s[0-9]", 0..3)))
            .prop_map(|(k, s, g, sel)| BoardOp::Reference(k, s, g, sel)),
        2 => (any::<usize>(), group(), -500.0..1500.0f64, -500.0..1500.0f64)
            .prop_map(|(i, g, x, y)| BoardOp::Move(i, g, x, y)),
        2 => (any::<usize>(), text(), value_text()).prop_map(|(i, l, v)| BoardOp::Edit(i, l, v)),
        1 => any::<usize>().prop_map(BoardOp::Delete),
        1 => proptest::option::of("[a-z-]{1,8}").prop_map(BoardOp::Link),
    ]
}

pub fn board_ops() -> impl Strategy<Value = Vec<BoardOp>> {
    proptest::collection::vec(board_op(), 0..24)
}

fn pick(board: &TagBoard, i: usize) -> Option<TagId> {
    let tags = board.tags();
    (!tags.is_empty()).then(|| tags[i % tags.len()].id.clone())
}

pub fn build_board(ops: &[BoardOp]) -> TagBoard {
    let mut b = TagBoard::new("prop");
    for op in ops {
        match op.clone() {
            BoardOp::Create(l, v, g, x, y) => {
                let _ = b.create_tag(&l, &v, g, Position::new(x, y));
            }
            BoardOp::Reference(k, source, g, sel) => {
                let kind = [ReferenceKind::Document, ReferenceKind::Image, ReferenceKind::DeckTemplate][k as usize];
                let selection = if kind == ReferenceKind::Document { sel } else { None };
                let _ = b.add_reference(ReferenceTag { kind, source, selection }, g, Position::default(), TagOrigin::Suggested);
            }
            BoardOp::Move(i, g, x, y) => {
                if let Some(id) = pick(&b, i) {
                    let _ = b.move_tag(&id, Position::new(x, y), g);
                }
            }
            BoardOp::Edit(i, l, v) => {
                if let Some(id) = pick(&b, i) {
                    let _ = b.edit_tag(&id, &l, &v);
                }
            }
            BoardOp::Delete(i) => {
                if let Some(id) = pick(&b, i) {
                    b.delete_tag(&id).unwrap();
                }
            }
            BoardOp::Link(r) => b.link_outline(r),
        }
    }
    b
}

pub fn check_board_round_trip(ops: Vec<BoardOp>) -> Check {
    let board = build_board(&ops);
    let bytes = serialize_board(&board);
    let back = deserialize_board(&bytes).unwrap();
    prop_assert_eq!(&back, &board);
    prop_assert_eq!(serialize_board(&back), bytes);
    // Active iff grouped, and tag revisions never exceed the board's.
    for t in back.tags() {
        prop_assert_eq!(t.is_active(), t.group.is_some());
        prop_assert!(t.revision <= back.revision());
    }
    Ok(())
}

pub fn outline_line() -> impl Strategy<Value = String> {
    prop_oneof![
        "[A-Za-z ]{0,12}".prop_map(|t| format!("## {t}")),
        "[A-Za-z ]{1,12}".prop_map(|t| format!("# {t}")),
        (0usize..3, "[A-Za-z][A-Za-z ,.]{0,14}").prop_map(|(l, t)| format!("{}- {t}", "  ".repeat(l))),
        (1u8..9, "[A-Za-z][A-Za-z ]{0,10}").prop_map(|(n, t)| format!("{n}. {t}")),
        ("[a-z ]{0,6}", "[a-z]{1,8}").prop_map(|(a, u)| format!("![{a}](https://x.org/{u}.jpg)")),
        "[A-Za-z][A-Za-z ,.!]{0,20}",
        Just(String::new()),
    ]
}

pub fn outline_lines() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(outline_line(), 0..20)
}

pub fn check_outline_round_trip(lines: Vec<String>) -> Check {
    let md = lines.join("\n");
    let parsed = parse_outline(&md);
    let canonical = serialize_outline(&parsed);
    prop_assert_eq!(parse_outline(&canonical), parsed);
    prop_assert_eq!(serialize_outline(&parse_outline(&canonical)), canonical);
    Ok(())
}

pub fn slide(n: u32) -> impl Strategy<Value = Slide> {
    (
        prop_oneof![Just(Layout::Title), Just(Layout::ListOrParagraph), Just(Layout::VerticalImage), Just(Layout::FullImage)],
        "[A-Za-z ]{1,12}",
        proptest::option::of(proptest::collection::vec("[a-z ]{1,10}", 1..4)),
        proptest::option::of("url\\([a-z]{1,6}\\.jpg\\)"),
        "#[0-9A-F]{6}",
        prop_oneof![Just("\"Roboto\", sans-serif"), Just("\"Merriweather\", serif")],
    )
        .prop_map(move |(layout, title, list, bg, color, font)| Slide {
            slide_number: n,
            layout,
            content: SlideContent {
                title: Some(title),
                list,
                background_image: bg,
                ..SlideContent::default()
            },
            theme: Theme {
                fonts: Fonts { header: font.into(), text: font.into() },
                colors: Colors { primary: color.clone(), secondary: color, tertiary: "#FFFFFF".into() },
                ..Theme::default()
            },
        })
}

pub fn deck() -> impl Strategy<Value = SlideDeck> {
    (1usize..8)
        .prop_flat_map(|n| (0..n as u32).map(|i| slide(i + 1)).collect::<Vec<_>>())
        .prop_map(|slides| SlideDeck::new("deck-p", slides))
}

pub fn session_for(deck: &SlideDeck, number: u32, variation: Slide) -> ScopedSlideSession {
    serde_json::from_value(json!({
        "sessionId": "s",
        "parentDeckId": deck.deck_id,
        "parentDeckRevision": deck.revision,
        "slideNumber": number,
        "sourceSlide": deck.slide(number).unwrap(),
        "scopedBoard": serde_json::from_slice::<Value>(&serialize_board(&TagBoard::new("s"))).unwrap(),
        "groundingMode": "text",
        "outOfRange": [],
        "variations": [variation],
        "variationViolations": [[]],
        "status": "variationsReady",
    }))
    .unwrap()
}

pub fn restyle_input() -> impl Strategy<Value = (SlideDeck, prop::sample::Index, Slide)> {
    (deck(), any::<prop::sample::Index>(), slide(1))
}

pub fn check_restyle_algebra((d, pick, source): (SlideDeck, prop::sample::Index, Slide)) -> Check {
    let once = restyle_deck(&d, &source);
    let twice = restyle_deck(&once, &source);
    prop_assert_eq!(&once.slides, &twice.slides);
    prop_assert_eq!(once.slides.len(), d.slides.len());
    for (a, b) in d.slides.iter().zip(&once.slides) {
        prop_assert_eq!(a.slide_number, b.slide_number);
        prop_assert_eq!(&a.layout, &b.layout);
        // The background image travels with the style.
        let (mut ca, mut cb) = (a.content.clone(), b.content.clone());
        ca.background_image = None;
        cb.background_image = None;
        prop_assert_eq!(ca, cb);
        prop_assert_eq!(&b.content.background_image, &source.content.background_image);
        prop_assert_eq!(&b.theme, &source.theme);
    }

    let n = d.slides[pick.index(d.slides.len())].slide_number;
    let mut variation = source.clone();
    variation.slide_number = n;
    variation.content.title = Some("variation marker".into());
    let session = session_for(&d, n, variation);
    let next = apply_variation(&d, &session, 0).unwrap();
    let changed = d.slides.iter().zip(&next.slides).filter(|(a, b)| a != b).count();
    prop_assert_eq!(changed, 1);
    prop_assert_eq!(next.revision, d.revision + 1);

    let styled = apply_style_to_deck(&d, &session, 0).unwrap();
    let again = restyle_deck(&styled, &session.variations[0]);
    prop_assert_eq!(&styled.slides, &again.slides);
    prop_assert_eq!(styled.slides.len(), d.slides.len());
    Ok(())
}

/// A reply in the bucket shape: `{"Narrative": ["L0:...", ...], ...}`.
pub fn buckets_json(counts: [usize; 3], seed: u32) -> Value {
    let names = ["Narrative", "Visual Style", "Content Sources"];
    let mut obj = serde_json::Map::new();
    for (name, n) in names.iter().zip(counts) {
        let items: Vec<Value> = (0..n).map(|i| json!(format!("L{i}:{name} {seed} {i}"))).collect();
        obj.insert(name.to_string(), Value::Array(items));
    }
    Value::Object(obj)
}

pub type GroundingInput = ([usize; 3], Vec<(String, Option<GroupName>)>, u32);

pub fn grounding_input() -> impl Strategy<Value = GroundingInput> {
    (
        [0usize..9, 0usize..9, 0usize..9],
        proptest::collection::vec((value_text(), group()), 0..6),
        any::<u32>(),
    )
}

pub fn check_grounding_placement((counts, existing, seed): GroundingInput) -> Check {
    let mut board = TagBoard::new("g");
    for (v, g) in &existing {
        let p = match g {
            Some(g) => board.group(*g).center,
            None => Position::new(-900.0, -900.0),
        };
        board.create_tag("Old", v, *g, p).unwrap();
    }
    let parsed = parse_grounding(&buckets_json(counts, seed)).unwrap();
    let expected_flags: Vec<GroupName> = GroupName::ALL
        .into_iter()
        .zip(counts)
        .filter(|(_, n)| !(2..=6).contains(n))
        .map(|(g, _)| g)
        .collect();
    prop_assert_eq!(&parsed.out_of_range, &expected_flags);

    let drafts = dedup_drafts(&board, &parsed.buckets);
    let mut grounded = board.clone();
    for id in apply_grounded(&mut grounded, &drafts).unwrap() {
        let t = grounded.tag(&id).unwrap();
        prop_assert!(t.is_active());
        prop_assert_eq!(grounded.group_at(&t.position), t.group);
        prop_assert_eq!(t.origin, TagOrigin::Grounded);
    }
    let mut suggested = board.clone();
    for id in apply_suggestions(&mut suggested, &drafts).unwrap() {
        let t = suggested.tag(&id).unwrap();
        prop_assert!(!t.is_active());
        prop_assert_eq!(suggested.group_at(&t.position), None);
        prop_assert_eq!(t.origin, TagOrigin::Suggested);
    }
    Ok(())
}

pub type SliderInput = (String, Option<String>, Vec<(String, String)>);

pub fn slider_input() -> impl Strategy<Value = SliderInput> {
    (
        value_text(),
        proptest::option::of(value_text()),
        proptest::collection::vec((value_text(), "[a-z ]{0,20}"), 5),
    )
}

pub fn check_slider_shape((value, opposite, steps): SliderInput) -> Check {
    let mut board = TagBoard::new("s");
    let id = board
        .create_tag("Mood", &value, Some(GroupName::VisualStyle), board.group(GroupName::VisualStyle).center)
        .unwrap()
        .id
        .clone();
    let tag = board.tag(&id).unwrap();
    let mut reply = json!({"steps": steps.iter().map(|(v, d)| json!({"value": v, "description": d})).collect::<Vec<_>>()});
    if let Some(o) = &opposite {
        reply["oppositeValue"] = json!(o);
    }
    let spec = parse_slider(&reply, tag).unwrap();
    prop_assert_eq!(spec.steps.len(), SLIDER_STEPS);
    prop_assert_eq!(&spec.steps[0].value, &value);
    prop_assert_eq!(&spec.left_value, &spec.steps[0].value);
    prop_assert_eq!(&spec.steps[SLIDER_STEPS - 1].value, &spec.right_value);
    let want_right = opposite
        .map(|o| o.trim().to_string())
        .filter(|o| !o.is_empty())
        .unwrap_or_else(|| steps[4].0.trim().to_string());
    prop_assert_eq!(&spec.right_value, &want_right);

    let mut short = reply.clone();
    short["steps"].as_array_mut().unwrap().pop();
    prop_assert!(parse_slider(&short, tag).is_err());
    Ok(())
}

#[derive(Debug, Clone)]
pub enum CacheOp {
    Edit(u8),
    Begin(u8, bool),
    Complete(usize),
    Invalidate(u8),
    Delete(u8),
    Read(u8, bool),
}

pub fn cache_op() -> impl Strategy<Value = CacheOp> {
    prop_oneof![
        2 => (0u8..4).prop_map(CacheOp::Edit),
        3 => (0u8..4, any::<bool>()).prop_map(|(t, k)| CacheOp::Begin(t, k)),
        3 => any::<usize>().prop_map(CacheOp::Complete),
        1 => (0u8..4).prop_map(CacheOp::Invalidate),
        1 => (0u8..4).prop_map(CacheOp::Delete),
        3 => (0u8..4, any::<bool>()).prop_map(|(t, k)| CacheOp::Read(t, k)),
    ]
}

pub const CACHE_CASES: u32 = 25;
pub const CACHE_STEPS: usize = 400;

pub fn cache_ops() -> impl Strategy<Value = Vec<CacheOp>> {
    proptest::collection::vec(cache_op(), CACHE_STEPS..=CACHE_STEPS + 100)
}

/// Replays `ops` against a cache and a model of tag revisions.
pub fn check_cache_freshness(ops: Vec<CacheOp>) -> Check {
    let mut cache: PreviewCache<u64> = PreviewCache::new();
    let mut revisions: HashMap<u8, u64> = HashMap::new();
    let mut next_rev = 1u64;
    // job id -> revision it was started for
    let mut jobs: BTreeMap<String, u64> = BTreeMap::new();
    let kind = |k: bool| if k { PreviewKind::Slider } else { PreviewKind::Alternatives };
    let tag = |t: u8| TagId(format!("tag-{t}"));

    for op in ops {
        match op {
            CacheOp::Edit(t) => {
                next_rev += 1;
                revisions.insert(t, next_rev);
                cache.observe(&tag(t), next_rev);
            }
            CacheOp::Begin(t, k) => {
                let rev = *revisions.entry(t).or_insert_with(|| {
                    next_rev += 1;
                    next_rev
                });
                if let (Begin::Started(id), _) = cache.begin(&tag(t), kind(k), rev) {
                    jobs.insert(id, rev);
                }
            }
            CacheOp::Complete(i) => {
                if !jobs.is_empty() {
                    let id = jobs.keys().nth(i % jobs.len()).unwrap().clone();
                    let rev = jobs.remove(&id).unwrap();
                    cache.complete(&id, Ok(rev));
                }
            }
            CacheOp::Invalidate(t) => {
                cache.invalidate(&tag(t));
                prop_assert!(cache.in_flight(&tag(t)).is_empty());
            }
            CacheOp::Delete(t) => {
                revisions.remove(&t);
                cache.remove_tag(&tag(t));
                prop_assert!(cache.in_flight(&tag(t)).is_empty());
                prop_assert!(!cache.knows(&tag(t)));
            }
            CacheOp::Read(t, k) => {
                let got = cache.get(&tag(t), kind(k));
                match (got, revisions.get(&t)) {
                    (Some(Lookup::Fresh(computed_for)), Some(cur)) => prop_assert_eq!(computed_for, *cur),
                    (Some(Lookup::Fresh(_)), None) => prop_assert!(false, "served a deleted tag"),
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// Character scan: everything before the first colon is the label.
pub fn scan_attr_value(s: &str) -> (String, String) {
    let mut label = String::new();
    let mut chars = s.chars();
    for c in chars.by_ref() {
        if c == ':' {
            let rest: String = chars.collect();
            return (label.trim().to_string(), rest.trim().to_string());
        }
        label.push(c);
    }
    (String::new(), s.trim().to_string())
}
