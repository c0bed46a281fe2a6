//! Word document text extraction.
//!
//! Reads `word/document.xml` (plus `styles.xml` and `docProps/core.xml` when
//! present). Heading paragraphs of levels 1 to 3 open sections; everything else
//! becomes body text in reading order. Tables are flattened one line per row,
//! embedded media is skipped.

use std::collections::HashMap;
use std::io::{Cursor, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zip::ZipArchive;

use super::IngestError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocSection {
    pub section_id: String,
    pub heading: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestedDocument {
    pub doc_id: String,
    pub title: String,
    pub sections: Vec<DocSection>,
    pub source_filename: Option<String>,
}

impl IngestedDocument {
    pub fn section(&self, id: &str) -> Option<&DocSection> {
        self.sections.iter().find(|s| s.section_id == id)
    }
}

#[derive(Debug, Default)]
struct StyleInfo {
    heading_level: HashMap<String, u8>,
    title_styles: Vec<String>,
}

fn attr(e: &BytesStart<'_>, local: &[u8]) -> Option<String> {
    e.attributes().flatten().find_map(|a| {
        (a.key.local_name().as_ref() == local)
            .then(|| a.unescape_value().ok().map(|v| v.into_owned()))
            .flatten()
    })
}

fn heading_level_from_name(name: &str) -> Option<u8> {
    let lower = name.to_ascii_lowercase();
    let rest = lower.strip_prefix("heading")?.trim();
    rest.parse::<u8>().ok().filter(|n| *n >= 1)
}

fn read_part(zip: &mut ZipArchive<Cursor<&[u8]>>, name: &str) -> Result<Option<String>, IngestError> {
    let mut file = match zip.by_name(name) {
        Ok(f) => f,
        Err(zip::result::ZipError::FileNotFound) => return Ok(None),
        Err(e) => return Err(IngestError::Corrupt(e.to_string())),
    };
    let mut s = String::new();
    file.read_to_string(&mut s)
        .map_err(|e| IngestError::Corrupt(format!("{name}: {e}")))?;
    Ok(Some(s))
}

fn parse_styles(xml: &str) -> Result<StyleInfo, IngestError> {
    let mut info = StyleInfo::default();
    let mut reader = Reader::from_str(xml);
    let mut current: Option<String> = None;
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) | Ok(Event::Empty(e)) => match e.local_name().as_ref() {
                b"style" => current = attr(&e, b"styleId"),
                b"name" => {
                    if let (Some(id), Some(name)) = (&current, attr(&e, b"val")) {
                        if let Some(level) = heading_level_from_name(&name) {
                            info.heading_level.insert(id.clone(), level);
                        } else if name.eq_ignore_ascii_case("title") {
                            info.title_styles.push(id.clone());
                        }
                    }
                }
                b"outlineLvl" => {
                    if let (Some(id), Some(lvl)) = (&current, attr(&e, b"val")) {
                        if let Ok(lvl) = lvl.parse::<u8>() {
                            info.heading_level.entry(id.clone()).or_insert(lvl + 1);
                        }
                    }
                }
                _ => {}
            },
            Ok(Event::End(e)) if e.local_name().as_ref() == b"style" => current = None,
            Ok(Event::Eof) => break,
            Err(e) => return Err(IngestError::Corrupt(format!("styles.xml: {e}"))),
            _ => {}
        }
    }
    Ok(info)
}

fn core_title(xml: &str) -> Option<String> {
    let mut reader = Reader::from_str(xml);
    let mut in_title = false;
    let mut out = String::new();
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) if e.local_name().as_ref() == b"title" => in_title = true,
            Ok(Event::End(e)) if e.local_name().as_ref() == b"title" => break,
            Ok(Event::Text(t)) if in_title => out.push_str(&t.unescape().ok()?),
            Ok(Event::Eof) | Err(_) => break,
            _ => {}
        }
    }
    let t = out.trim();
    (!t.is_empty()).then(|| t.to_string())
}

enum Block {
    Paragraph { text: String, heading: Option<u8>, title: bool },
    TableRow(String),
}

fn parse_body(xml: &str, styles: &StyleInfo) -> Result<Vec<Block>, IngestError> {
    let mut reader = Reader::from_str(xml);
    let mut blocks = Vec::new();
    let mut table_depth = 0usize;
    let mut in_text = false;
    let mut para: Option<(String, Option<u8>, bool)> = None;
    let mut cells: Vec<String> = Vec::new();
    let mut cell = String::new();

    loop {
        let event = reader
            .read_event()
            .map_err(|e| IngestError::Corrupt(format!("document.xml: {e}")))?;
        match event {
            Event::Start(e) => match e.local_name().as_ref() {
                b"p" => para = Some((String::new(), None, false)),
                b"t" => in_text = true,
                b"tbl" => table_depth += 1,
                b"tr" if table_depth == 1 => cells.clear(),
                b"tc" if table_depth == 1 => cell.clear(),
                b"pStyle" | b"outlineLvl" => style_hint(&e, styles, &mut para),
                _ => {}
            },
            Event::Empty(e) => match e.local_name().as_ref() {
                b"pStyle" | b"outlineLvl" => style_hint(&e, styles, &mut para),
                b"tab" => {
                    if let Some(p) = para.as_mut() {
                        p.0.push('\t');
                    }
                }
                b"br" | b"cr" => {
                    if let Some(p) = para.as_mut() {
                        p.0.push('\n');
                    }
                }
                _ => {}
            },
            Event::Text(t) if in_text => {
                if let Some(p) = para.as_mut() {
                    let text = t
                        .unescape()
                        .map_err(|e| IngestError::Corrupt(format!("document.xml: {e}")))?;
                    p.0.push_str(&text);
                }
            }
            Event::End(e) => match e.local_name().as_ref() {
                b"t" => in_text = false,
                b"p" => {
                    if let Some((text, heading, title)) = para.take() {
                        let text = text.trim().to_string();
                        if table_depth > 0 {
                            if !text.is_empty() {
                                if !cell.is_empty() {
                                    cell.push(' ');
                                }
                                cell.push_str(&text);
                            }
                        } else if !text.is_empty() {
                            blocks.push(Block::Paragraph { text, heading, title });
                        }
                    }
                }
                b"tc" if table_depth == 1 => cells.push(std::mem::take(&mut cell)),
                b"tr" if table_depth == 1 => {
                    if cells.iter().any(|c| !c.is_empty()) {
                        blocks.push(Block::TableRow(cells.join(" | ")));
                    }
                }
                b"tbl" => table_depth = table_depth.saturating_sub(1),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(blocks)
}

fn style_hint(e: &BytesStart<'_>, styles: &StyleInfo, para: &mut Option<(String, Option<u8>, bool)>) {
    let Some(p) = para.as_mut() else { return };
    let Some(val) = attr(e, b"val") else { return };
    if e.local_name().as_ref() == b"outlineLvl" {
        if let Ok(lvl) = val.parse::<u8>() {
            p.1 = Some(lvl + 1);
        }
        return;
    }
    if let Some(level) = styles
        .heading_level
        .get(&val)
        .copied()
        .or_else(|| heading_level_from_name(&val))
    {
        p.1 = Some(level);
    }
    if styles.title_styles.contains(&val) || val.eq_ignore_ascii_case("title") {
        p.2 = true;
    }
}

/// Extracts sections from `.docx` bytes. The same bytes always produce the
/// same document, ids included.
pub fn import_docx(bytes: &[u8], filename: Option<&str>) -> Result<IngestedDocument, IngestError> {
    let mut zip = ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| IngestError::Corrupt(format!("not a docx container: {e}")))?;
    let document = read_part(&mut zip, "word/document.xml")?
        .ok_or_else(|| IngestError::Corrupt("word/document.xml missing".into()))?;
    let styles = match read_part(&mut zip, "word/styles.xml")? {
        Some(xml) => parse_styles(&xml)?,
        None => StyleInfo::default(),
    };
    let meta_title = read_part(&mut zip, "docProps/core.xml")?.and_then(|x| core_title(&x));
    let blocks = parse_body(&document, &styles)?;

    let mut styled_title = None;
    let mut sections: Vec<(String, Vec<String>)> = Vec::new();
    for block in blocks {
        match block {
            Block::Paragraph { text, title: true, .. } if styled_title.is_none() => {
                styled_title = Some(text)
            }
            Block::Paragraph {
                text,
                heading: Some(1..=3),
                ..
            } => sections.push((text, Vec::new())),
            Block::Paragraph { text, .. } | Block::TableRow(text) => {
                if sections.is_empty() {
                    sections.push((String::new(), Vec::new()));
                }
                sections.last_mut().unwrap().1.push(text);
            }
        }
    }
    if sections.is_empty() {
        sections.push((String::new(), Vec::new()));
    }

    let digest = Sha256::digest(bytes);
    let doc_id = format!("doc-{}", &hex::encode(digest)[..12]);
    let stem = filename.map(|f| {
        let base = f.rsplit(['/', '\\']).next().unwrap_or(f);
        base.strip_suffix(".docx").unwrap_or(base).to_string()
    });
    let title = meta_title
        .or(styled_title)
        .or(stem)
        .or_else(|| sections.iter().find(|s| !s.0.is_empty()).map(|s| s.0.clone()))
        .unwrap_or_else(|| "Untitled document".to_string());

    Ok(IngestedDocument {
        doc_id,
        title,
        sections: sections
            .into_iter()
            .enumerate()
            .map(|(i, (heading, body))| DocSection {
                section_id: format!("s{}", i + 1),
                heading,
                body: body.join("\n"),
            })
            .collect(),
        source_filename: filename.map(str::to_string),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TESLA: &[u8] = include_bytes!("../../fixtures/docs/tesla.docx");

    #[test]
    fn tesla_has_three_sections() {
        let doc = import_docx(TESLA, Some("Tesla.docx")).unwrap();
        assert_eq!(doc.title, "Tesla");
        let headings: Vec<_> = doc.sections.iter().map(|s| s.heading.as_str()).collect();
        assert_eq!(
            headings,
            ["Company History", "Electric Vehicle Lineup", "Energy and Charging"]
        );
        assert_eq!(
            doc.sections[0].body,
            "Tesla was founded in 2003 by Martin Eberhard and Marc Tarpenning.\nElon Musk joined as chairman after leading the first funding round."
        );
        assert!(doc.sections[1].body.ends_with("Model | Launch\nModel S | 2012"));
        assert_eq!(doc.sections[2].section_id, "s3");
    }

    #[test]
    fn deterministic_ids() {
        let a = import_docx(TESLA, None).unwrap();
        let b = import_docx(TESLA, None).unwrap();
        assert_eq!(a, b);
        assert!(a.doc_id.starts_with("doc-"));
    }

    #[test]
    fn no_headings_single_section() {
        let doc = import_docx(include_bytes!("../../fixtures/docs/no_headings.docx"), Some("notes.docx")).unwrap();
        assert_eq!(doc.sections.len(), 1);
        assert_eq!(doc.sections[0].heading, "");
        assert_eq!(doc.sections[0].body, "Just a note about kayaks.\nSecond paragraph.");
        assert_eq!(doc.title, "notes");
    }

    #[test]
    fn empty_document_one_empty_section() {
        let doc = import_docx(include_bytes!("../../fixtures/docs/empty.docx"), None).unwrap();
        assert_eq!(doc.sections.len(), 1);
        assert_eq!(doc.sections[0].body, "");
    }

    #[test]
    fn truncated_zip_is_an_error() {
        let cut = &TESLA[..TESLA.len() / 2];
        assert!(matches!(import_docx(cut, None), Err(IngestError::Corrupt(_))));
        assert!(matches!(import_docx(b"hello", None), Err(IngestError::Corrupt(_))));
    }
}
