//! Self-contained HTML rendering of slides.
//!
//! Output is a pure function of the slide JSON. Theme fonts, colors and sizes
//! go into inline styles; a background image replaces the background color.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::deck::{leading_font_family, Layout, Slide, SlideDeck, Violation};

/// Slide canvas in CSS pixels.
pub const SLIDE_WIDTH: u32 = 1280;
pub const SLIDE_HEIGHT: u32 = 720;
/// Fixed padding scale. `theme.space` is carried but not applied.
const PADDING: [u32; 3] = [24, 48, 72];

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// CSS `background-image` value for a content image reference.
pub fn css_url(value: &str) -> String {
    let v = value.trim();
    if v.starts_with("url(") {
        v.to_string()
    } else {
        format!("url(\"{}\")", v.replace('"', "%22"))
    }
}

/// The image address inside a `url(...)` wrapper, or the value itself.
pub fn plain_url(value: &str) -> &str {
    let v = value.trim();
    v.strip_prefix("url(")
        .and_then(|r| r.strip_suffix(')'))
        .map(|r| r.trim().trim_matches(|c| c == '"' || c == '\''))
        .unwrap_or(v)
}

fn background_css(slide: &Slide) -> String {
    match &slide.content.background_image {
        Some(bg) if !bg.trim().is_empty() => format!(
            "background-image:{};background-size:cover;background-position:center",
            css_url(bg)
        ),
        _ => format!("background-color:{}", slide.theme.colors.tertiary),
    }
}

pub fn render_slide(slide: &Slide) -> String {
    render_slide_with(slide, &[])
}

fn render_slide_with(slide: &Slide, violations: &[&Violation]) -> String {
    let theme = &slide.theme;
    let c = &slide.content;
    let mut h = String::new();
    let section_style = format!(
        "position:relative;box-sizing:border-box;overflow:hidden;width:{SLIDE_WIDTH}px;height:{SLIDE_HEIGHT}px;padding:{}px {}px;{};color:{};font-family:{};font-size:{}",
        PADDING[1],
        PADDING[2],
        background_css(slide),
        theme.colors.primary,
        theme.fonts.text,
        theme.font_sizes.text,
    );
    let _ = write!(
        h,
        "<section class=\"slide layout-{}\" data-slide-number=\"{}\" style=\"{}\">",
        escape_html(slide.layout.as_str()),
        slide.slide_number,
        escape_html(&section_style)
    );
    if !violations.is_empty() {
        let rules: Vec<String> = violations
            .iter()
            .map(|v| format!("{:?}: {}", v.rule, v.detail))
            .collect();
        let _ = write!(
            h,
            "<div class=\"violation-badge\" title=\"{}\" style=\"position:absolute;top:8px;right:8px;background:#c00;color:#fff;font:bold 14px sans-serif;padding:4px 8px;border-radius:4px\">{} issue{}</div>",
            escape_html(&rules.join("; ")),
            violations.len(),
            if violations.len() == 1 { "" } else { "s" }
        );
    }
    let heading = |h: &mut String, text: &str| {
        let style = format!(
            "margin:0 0 {}px 0;font-family:{};font-size:{};color:{}",
            PADDING[0], theme.fonts.header, theme.font_sizes.h1, theme.colors.primary
        );
        let _ = write!(h, "<h1 style=\"{}\">{}</h1>", escape_html(&style), escape_html(text));
    };
    let body = |h: &mut String| {
        if let Some(items) = &c.list {
            let _ = write!(
                h,
                "<ul style=\"{}\">",
                escape_html(&format!("margin:0;padding-left:{}px", PADDING[1]))
            );
            for item in items {
                let _ = write!(
                    h,
                    "<li style=\"{}\">{}</li>",
                    escape_html(&format!("margin-bottom:{}px", PADDING[0])),
                    escape_html(item)
                );
            }
            h.push_str("</ul>");
        } else if let Some(p) = &c.paragraph {
            let _ = write!(h, "<p style=\"margin:0\">{}</p>", escape_html(p));
        }
    };
    let image = |h: &mut String, style: &str| {
        if let Some(src) = &c.image {
            let _ = write!(
                h,
                "<img src=\"{}\" alt=\"\" style=\"{}\">",
                escape_html(plain_url(src)),
                escape_html(style)
            );
        }
    };

    match &slide.layout {
        Layout::Title => {
            h.push_str("<div style=\"display:flex;flex-direction:column;justify-content:center;align-items:center;height:100%;text-align:center\">");
            heading(&mut h, c.title.as_deref().unwrap_or(""));
            if let Some(sub) = &c.subtitle {
                let style = format!(
                    "margin:0;font-family:{};color:{}",
                    theme.fonts.text, theme.colors.secondary
                );
                let _ = write!(h, "<h2 style=\"{}\">{}</h2>", escape_html(&style), escape_html(sub));
            }
            h.push_str("</div>");
        }
        Layout::VerticalImage => {
            h.push_str("<div style=\"display:flex;gap:48px;height:100%\"><div style=\"flex:1\">");
            if let Some(t) = &c.title {
                heading(&mut h, t);
            }
            body(&mut h);
            h.push_str("</div><div style=\"flex:1\">");
            image(&mut h, "width:100%;height:100%;object-fit:cover");
            h.push_str("</div></div>");
        }
        Layout::FullImage => {
            image(
                &mut h,
                "position:absolute;top:0;left:0;width:100%;height:100%;object-fit:cover",
            );
            if let Some(t) = &c.title {
                h.push_str("<div style=\"position:relative\">");
                heading(&mut h, t);
                h.push_str("</div>");
            }
        }
        Layout::ListOrParagraph | Layout::Other(_) => {
            if let Some(t) = &c.title {
                heading(&mut h, t);
            }
            body(&mut h);
            image(&mut h, "max-width:40%;max-height:50%;margin-top:24px");
        }
    }
    h.push_str("</section>");
    h
}

fn font_link(families: &BTreeSet<&str>) -> String {
    if families.is_empty() {
        return String::new();
    }
    let query: Vec<String> = families
        .iter()
        .map(|f| format!("family={}", f.replace(' ', "+")))
        .collect();
    format!(
        "<link rel=\"stylesheet\" href=\"https://fonts.googleapis.com/css2?{}&amp;display=swap\">",
        query.join("&amp;")
    )
}

pub fn render_deck(deck: &SlideDeck) -> String {
    render_deck_annotated(deck, &[])
}

/// Renders the deck, badging slides that have violations.
pub fn render_deck_annotated(deck: &SlideDeck, violations: &[Violation]) -> String {
    let families: BTreeSet<&str> = deck
        .slides
        .iter()
        .flat_map(|s| [&s.theme.fonts.header, &s.theme.fonts.text])
        .map(|f| leading_font_family(f))
        .filter(|f| !f.is_empty())
        .collect();
    let mut h = String::new();
    let _ = write!(
        h,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n{}\n<style>body{{margin:0;background:#222}}.slide{{margin:24px auto}}</style>\n</head>\n<body>\n",
        escape_html(&deck.deck_id),
        font_link(&families)
    );
    for (i, slide) in deck.slides.iter().enumerate() {
        let own: Vec<&Violation> = violations
            .iter()
            .filter(|v| v.slide_number as usize == i + 1)
            .collect();
        h.push_str(&render_slide_with(slide, &own));
        h.push('\n');
    }
    h.push_str("</body>\n</html>\n");
    h
}
