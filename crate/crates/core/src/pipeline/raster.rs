use image::{Rgb, RgbImage};

use crate::artifacts::{Layout, Slide};

/// Turns a slide into PNG bytes for image-based grounding.
pub trait Rasterizer: Send + Sync {
    fn rasterize(&self, slide: &Slide) -> Result<Vec<u8>, String>;
}

/// A coarse block-diagram rasterizer: background, title bar, text lines and
/// image boxes painted in theme colors. Deterministic and dependency-light;
/// swap in a browser-backed implementation for faithful pixels.
#[derive(Debug, Clone, Copy)]
pub struct BlockRasterizer {
    pub width: u32,
    pub height: u32,
}

impl Default for BlockRasterizer {
    fn default() -> Self {
        Self {
            width: 320,
            height: 180,
        }
    }
}

/// `#rgb` / `#rrggbb` and a few names; anything else falls back.
pub fn parse_color(s: &str, fallback: [u8; 3]) -> [u8; 3] {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix('#') {
        let nib = |c: u8| (c as char).to_digit(16).map(|d| d as u8);
        let b = hex.as_bytes();
        match b.len() {
            3 => {
                if let (Some(r), Some(g), Some(bl)) = (nib(b[0]), nib(b[1]), nib(b[2])) {
                    return [r * 17, g * 17, bl * 17];
                }
            }
            6 => {
                if let Ok(v) = u32::from_str_radix(hex, 16) {
                    return [(v >> 16) as u8, (v >> 8) as u8, v as u8];
                }
            }
            _ => {}
        }
        return fallback;
    }
    match s.to_ascii_lowercase().as_str() {
        "black" => [0, 0, 0],
        "white" => [255, 255, 255],
        "red" => [255, 0, 0],
        "green" => [0, 128, 0],
        "blue" => [0, 0, 255],
        "navy" => [0, 0, 128],
        "gray" | "grey" => [128, 128, 128],
        "yellow" => [255, 255, 0],
        "orange" => [255, 165, 0],
        "purple" => [128, 0, 128],
        "teal" => [0, 128, 128],
        _ => fallback,
    }
}

impl BlockRasterizer {
    fn fill(img: &mut RgbImage, x0: u32, y0: u32, w: u32, h: u32, c: [u8; 3]) {
        for y in y0..(y0 + h).min(img.height()) {
            for x in x0..(x0 + w).min(img.width()) {
                img.put_pixel(x, y, Rgb(c));
            }
        }
    }
}

impl Rasterizer for BlockRasterizer {
    fn rasterize(&self, slide: &Slide) -> Result<Vec<u8>, String> {
        let (w, h) = (self.width.max(32), self.height.max(18));
        let colors = &slide.theme.colors;
        let primary = parse_color(&colors.primary, [0, 0, 0]);
        let secondary = parse_color(&colors.secondary, primary);
        let bg = parse_color(&colors.tertiary, [255, 255, 255]);
        let mut img = RgbImage::from_pixel(w, h, Rgb(bg));
        let pad = w / 16;
        let c = &slide.content;
        if c.background_image.is_some() {
            // Diagonal hatching stands in for a photo.
            for y in 0..h {
                for x in 0..w {
                    if (x + y) % 12 < 6 {
                        img.put_pixel(x, y, Rgb([150, 160, 170]));
                    }
                }
            }
        }
        let text_w = match slide.layout {
            Layout::VerticalImage => w / 2 - pad,
            _ => w - 2 * pad,
        };
        match slide.layout {
            Layout::Title => {
                Self::fill(&mut img, pad, h * 2 / 5, w - 2 * pad, h / 9, primary);
                if c.subtitle.is_some() {
                    Self::fill(&mut img, pad * 2, h * 3 / 5, w - 4 * pad, h / 20, secondary);
                }
            }
            _ => {
                if c.title.is_some() {
                    Self::fill(&mut img, pad, pad, text_w, h / 10, primary);
                }
                let lines = match (&c.list, &c.paragraph) {
                    (Some(list), _) => list.len(),
                    (None, Some(p)) => (p.len() / 60).clamp(1, 6),
                    _ => 0,
                };
                let indent = if c.list.is_some() { pad / 2 } else { 0 };
                for i in 0..lines as u32 {
                    let y = pad + h / 6 + i * (h / 9);
                    Self::fill(&mut img, pad + indent, y, text_w - indent, h / 24, secondary);
                }
                if c.image.is_some() {
                    let (x, y, iw, ih) = match slide.layout {
                        Layout::VerticalImage => (w / 2, 0, w / 2, h),
                        _ => (w * 2 / 3, h / 3, w / 4, h / 2),
                    };
                    Self::fill(&mut img, x, y, iw, ih, [90, 110, 130]);
                }
            }
        }
        let mut out = Vec::new();
        img.write_to(&mut std::io::Cursor::new(&mut out), image::ImageFormat::Png)
            .map_err(|e| e.to_string())?;
        Ok(out)
    }
}
