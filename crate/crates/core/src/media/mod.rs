//! Frame sampling, timestamp overlay rendering, and storyboard composition.
//!
//! Video decoding is out of scope: inputs are directories of pre-extracted
//! PNG frames named `frame_%06d.png`. Timestamps render as seconds:millis
//! (`%02d:%03d` by default) in the top-left corner, white glyphs on a black
//! box, using the built-in bitmap font so output is identical across
//! platforms.

pub mod font;

use std::path::Path;

use image::{imageops, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sidecar schema version for storyboard tile maps.
pub const STORYBOARD_SCHEMA_VERSION: u32 = 1;

/// One sampled video frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub index: usize,
    /// Seconds on the source timeline: `index / fps`.
    pub timestamp: f64,
    pub pixels: RgbImage,
}

/// Placement and look of the burned-in timestamp label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlayStyle {
    /// Top-left anchor of the label box, in pixels.
    pub offset: (u32, u32),
    /// Integer scale applied to the 5x7 font.
    pub scale: u32,
    /// Minimum digits for the whole-second part.
    pub seconds_width: usize,
    /// Minimum digits for the millisecond part.
    pub millis_width: usize,
    pub foreground: [u8; 3],
    pub background: [u8; 3],
}

impl Default for OverlayStyle {
    fn default() -> Self {
        Self {
            offset: (4, 4),
            scale: 1,
            seconds_width: 2,
            millis_width: 3,
            foreground: [255, 255, 255],
            background: [0, 0, 0],
        }
    }
}

/// Elapsed seconds rendered as zero-padded `SS:MSS`.
///
/// Milliseconds are rounded, with carry into the seconds part, so 2.9996 s
/// becomes `03:000` rather than `02:1000`.
pub fn format_timestamp(seconds: f64, style: &OverlayStyle) -> String {
    debug_assert!(seconds >= 0.0);
    let total_ms = (seconds * 1000.0).round().max(0.0) as u64;
    format!(
        "{:0sw$}:{:0mw$}",
        total_ms / 1000,
        total_ms % 1000,
        sw = style.seconds_width,
        mw = style.millis_width
    )
}

impl OverlayStyle {
    /// Pixel size of the label box for an `n`-character label: glyph cells
    /// plus one pixel of padding on every side, all scaled.
    pub fn box_size(&self, label_chars: usize) -> (u32, u32) {
        let text_w = (font::GLYPH_WIDTH + 1) * label_chars.max(1) - 1;
        (
            self.scale * (text_w as u32 + 2),
            self.scale * (font::GLYPH_HEIGHT as u32 + 2),
        )
    }
}

/// Loads `frame_%06d.png` files as frames with timestamps `index / fps`.
///
/// Indices must start at 0 and be contiguous; gaps, stray indices, and
/// unreadable images are errors, as is an empty directory.
pub fn sample_frames(frames_dir: &Path, fps: f64) -> Result<Vec<Frame>> {
    if fps <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "fps must be positive, got {fps}"
        )));
    }
    let mut indices: Vec<usize> = Vec::new();
    for entry in std::fs::read_dir(frames_dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(idx) = parse_frame_name(&name) {
            indices.push(idx);
        }
    }
    if indices.is_empty() {
        return Err(Error::Media(format!(
            "no frame_%06d.png files in {}",
            frames_dir.display()
        )));
    }
    indices.sort_unstable();
    for (expect, &got) in indices.iter().enumerate() {
        if got != expect {
            return Err(Error::Media(format!(
                "non-contiguous frame indices in {}: expected {expect}, found {got}",
                frames_dir.display()
            )));
        }
    }
    indices
        .iter()
        .map(|&i| {
            let path = frames_dir.join(format!("frame_{i:06}.png"));
            let pixels = image::open(&path)
                .map_err(|e| Error::Media(format!("unreadable frame {}: {e}", path.display())))?
                .to_rgb8();
            Ok(Frame {
                index: i,
                timestamp: i as f64 / fps,
                pixels,
            })
        })
        .collect()
}

fn parse_frame_name(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Burns the frame's timestamp onto a copy; the input frame is untouched.
///
/// Fails when the label box does not fit at the style's offset or would
/// cover more than a quarter of the frame width.
pub fn render_timestamp(frame: &Frame, style: &OverlayStyle) -> Result<Frame> {
    let label = format_timestamp(frame.timestamp, style);
    let (box_w, box_h) = style.box_size(label.len());
    let (w, h) = (frame.pixels.width(), frame.pixels.height());
    if style.offset.0 + box_w > w || style.offset.1 + box_h > h {
        return Err(Error::Media(format!(
            "frame {w}x{h} too small for a {box_w}x{box_h} overlay at offset {:?}",
            style.offset
        )));
    }
    if box_w * 4 > w {
        return Err(Error::Media(format!(
            "overlay box {box_w}px exceeds 25% of frame width {w}px"
        )));
    }
    let mut pixels = frame.pixels.clone();
    draw_label(&mut pixels, style, &label);
    Ok(Frame {
        index: frame.index,
        timestamp: frame.timestamp,
        pixels,
    })
}

fn draw_label(img: &mut RgbImage, style: &OverlayStyle, label: &str) {
    let (box_w, box_h) = style.box_size(label.len());
    let (ox, oy) = style.offset;
    for y in 0..box_h {
        for x in 0..box_w {
            img.put_pixel(ox + x, oy + y, Rgb(style.background));
        }
    }
    let s = style.scale;
    let mut pen_x = ox + s;
    let pen_y = oy + s;
    for c in label.chars() {
        // Unknown characters render as blank cells.
        if let Some(rows) = font::glyph(c) {
            for (ry, row) in rows.iter().enumerate() {
                for rx in 0..font::GLYPH_WIDTH {
                    if row & (1 << (font::GLYPH_WIDTH - 1 - rx)) != 0 {
                        for dy in 0..s {
                            for dx in 0..s {
                                img.put_pixel(
                                    pen_x + (rx as u32) * s + dx,
                                    pen_y + (ry as u32) * s + dy,
                                    Rgb(style.foreground),
                                );
                            }
                        }
                    }
                }
            }
        }
        pen_x += (font::GLYPH_WIDTH as u32 + 1) * s;
    }
}

/// Row-wrapping limits for storyboard composition.
#[derive(Debug, Clone, Copy)]
pub struct StoryboardOptions {
    /// Rows wrap instead of exceeding this width.
    pub max_width: u32,
}

impl Default for StoryboardOptions {
    fn default() -> Self {
        Self { max_width: 16384 }
    }
}

/// Where one tile landed in the composite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileInfo {
    pub tile: usize,
    pub source_index: usize,
    pub timestamp: f64,
    /// Left edge: the prefix sum of tile widths within the row.
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Tile map written alongside every storyboard image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoryboardSidecar {
    pub schema_version: u32,
    pub fps: f64,
    pub tiles: Vec<TileInfo>,
}

/// A composed storyboard: the composite image plus its tile map.
#[derive(Debug, Clone)]
pub struct Storyboard {
    pub image: RgbImage,
    pub tiles: Vec<TileInfo>,
}

/// Concatenates timestamped frames horizontally in chronological order.
///
/// Mixed heights are normalized by scaling every tile to the minimum height
/// (aspect preserved) before overlay and concatenation. Storyboards wider
/// than `options.max_width` wrap onto additional rows.
pub fn compose_storyboard(
    frames: &[Frame],
    style: &OverlayStyle,
    options: &StoryboardOptions,
) -> Result<Storyboard> {
    if frames.is_empty() {
        return Err(Error::Media("cannot compose an empty storyboard".into()));
    }
    let min_h = frames.iter().map(|f| f.pixels.height()).min().unwrap();
    if min_h == 0 {
        return Err(Error::Media("zero-height frame".into()));
    }

    let mut tiles_px: Vec<RgbImage> = Vec::with_capacity(frames.len());
    for frame in frames {
        let scaled = if frame.pixels.height() != min_h {
            let w = ((frame.pixels.width() as u64 * min_h as u64)
                / frame.pixels.height() as u64)
                .max(1) as u32;
            imageops::resize(&frame.pixels, w, min_h, imageops::FilterType::Triangle)
        } else {
            frame.pixels.clone()
        };
        let tile_frame = Frame {
            index: frame.index,
            timestamp: frame.timestamp,
            pixels: scaled,
        };
        tiles_px.push(render_timestamp(&tile_frame, style)?.pixels);
    }

    // Greedy row packing; a row always accepts at least one tile.
    let mut tiles: Vec<TileInfo> = Vec::with_capacity(frames.len());
    let mut row = 0u32;
    let mut x = 0u32;
    for (i, px) in tiles_px.iter().enumerate() {
        if x > 0 && x + px.width() > options.max_width {
            row += 1;
            x = 0;
        }
        tiles.push(TileInfo {
            tile: i,
            source_index: frames[i].index,
            timestamp: frames[i].timestamp,
            x,
            y: row * min_h,
            width: px.width(),
            height: min_h,
        });
        x += px.width();
    }
    let total_w = tiles
        .iter()
        .map(|t| t.x + t.width)
        .max()
        .unwrap_or(1)
        .max(1);
    let total_h = (row + 1) * min_h;

    let mut canvas = RgbImage::new(total_w, total_h);
    for (tile, px) in tiles.iter().zip(&tiles_px) {
        imageops::replace(&mut canvas, px, tile.x as i64, tile.y as i64);
    }
    Ok(Storyboard {
        image: canvas,
        tiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_frame(index: usize, w: u32, h: u32, level: u8) -> Frame {
        let mut pixels = RgbImage::new(w, h);
        for p in pixels.pixels_mut() {
            *p = Rgb([level, level, level]);
        }
        Frame {
            index,
            timestamp: index as f64,
            pixels,
        }
    }

    #[test]
    fn timestamp_format_examples() {
        let style = OverlayStyle::default();
        assert_eq!(format_timestamp(3.5, &style), "03:500");
        assert_eq!(format_timestamp(0.0, &style), "00:000");
        assert_eq!(format_timestamp(12.345, &style), "12:345");
        assert_eq!(format_timestamp(2.9996, &style), "03:000");
        assert_eq!(format_timestamp(123.4, &style), "123:400");
    }

    #[test]
    fn overlay_changes_only_box_pixels() {
        let style = OverlayStyle::default();
        let frame = flat_frame(3, 200, 60, 90);
        let out = render_timestamp(&frame, &style).unwrap();
        let (box_w, box_h) = style.box_size(format_timestamp(3.0, &style).len());
        let mut changed_outside = 0;
        for (x, y, p) in out.pixels.enumerate_pixels() {
            let inside = x >= style.offset.0
                && x < style.offset.0 + box_w
                && y >= style.offset.1
                && y < style.offset.1 + box_h;
            if !inside && *p != Rgb([90, 90, 90]) {
                changed_outside += 1;
            }
        }
        assert_eq!(changed_outside, 0);
        // Original frame untouched.
        assert!(frame.pixels.pixels().all(|p| *p == Rgb([90, 90, 90])));
        // Some foreground glyph pixels were written.
        assert!(out.pixels.pixels().any(|p| *p == Rgb([255, 255, 255])));
    }

    #[test]
    fn overlay_rejects_small_frames() {
        let style = OverlayStyle::default();
        assert!(render_timestamp(&flat_frame(0, 30, 20, 0), &style).is_err());
        // Fits geometrically but violates the 25%-of-width bound.
        assert!(render_timestamp(&flat_frame(0, 60, 40, 0), &style).is_err());
    }

    #[test]
    fn overlay_visible_on_blank_frames() {
        // Pipeline order: blanking happens before overlay, so a masked frame
        // still carries a readable timestamp.
        let style = OverlayStyle::default();
        let blank = flat_frame(5, 200, 60, 0);
        let out = render_timestamp(&blank, &style).unwrap();
        assert!(out.pixels.pixels().any(|p| *p == Rgb([255, 255, 255])));
    }

    #[test]
    fn storyboard_concatenates_in_order() {
        let style = OverlayStyle::default();
        let frames: Vec<Frame> = (0..5).map(|i| flat_frame(i, 160, 80, 50)).collect();
        let sb = compose_storyboard(&frames, &style, &StoryboardOptions::default()).unwrap();
        assert_eq!(sb.image.width(), 800);
        assert_eq!(sb.image.height(), 80);
        for (i, t) in sb.tiles.iter().enumerate() {
            assert_eq!(t.x, 160 * i as u32);
            assert_eq!(t.y, 0);
        }
    }

    #[test]
    fn storyboard_single_frame_is_overlaid_frame() {
        let style = OverlayStyle::default();
        let frame = flat_frame(0, 160, 80, 50);
        let sb = compose_storyboard(
            std::slice::from_ref(&frame),
            &style,
            &StoryboardOptions::default(),
        )
        .unwrap();
        let direct = render_timestamp(&frame, &style).unwrap();
        assert_eq!(sb.image.as_raw(), direct.pixels.as_raw());
    }

    #[test]
    fn storyboard_normalizes_mixed_heights() {
        let style = OverlayStyle::default();
        let frames = vec![flat_frame(0, 200, 80, 10), flat_frame(1, 200, 160, 20)];
        let sb = compose_storyboard(&frames, &style, &StoryboardOptions::default()).unwrap();
        assert_eq!(sb.image.height(), 80);
        // Second tile scaled to 100x80.
        assert_eq!(sb.tiles[1].width, 100);
        assert_eq!(sb.image.width(), 300);
    }

    #[test]
    fn storyboard_wraps_rows_at_max_width() {
        let style = OverlayStyle::default();
        let frames: Vec<Frame> = (0..4).map(|i| flat_frame(i, 160, 80, 40)).collect();
        let sb = compose_storyboard(
            &frames,
            &style,
            &StoryboardOptions { max_width: 350 },
        )
        .unwrap();
        assert_eq!(sb.image.width(), 320);
        assert_eq!(sb.image.height(), 160);
        assert_eq!((sb.tiles[2].x, sb.tiles[2].y), (0, 80));
        assert_eq!((sb.tiles[3].x, sb.tiles[3].y), (160, 80));
    }

    #[test]
    fn sample_frames_reads_contiguous_indices() {
        let tmp = tempfile::tempdir().unwrap();
        for i in 0..4 {
            RgbImage::new(8, 8)
                .save(tmp.path().join(format!("frame_{i:06}.png")))
                .unwrap();
        }
        let frames = sample_frames(tmp.path(), 2.0).unwrap();
        assert_eq!(frames.len(), 4);
        let ts: Vec<f64> = frames.iter().map(|f| f.timestamp).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0, 1.5]);

        // A gap makes the directory invalid.
        std::fs::remove_file(tmp.path().join("frame_000002.png")).unwrap();
        assert!(sample_frames(tmp.path(), 1.0).is_err());
    }

    #[test]
    fn sample_frames_rejects_empty_dir() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(sample_frames(tmp.path(), 1.0).is_err());
    }
}
