//! Schematic SVG renderings of indexed screens.
//!
//! The index keeps tile coverage, not element boxes, so a thumbnail shades
//! each covered tile in its class color with opacity proportional to the
//! covered area.

use std::fmt::Write as _;

use sketchscreen_core::grid::{TILE_COLS, TILE_ROWS};
use sketchscreen_core::{ElementClass, ScreenIndex};

pub const THUMB_WIDTH: u32 = 180;
pub const THUMB_HEIGHT: u32 = 320;

fn class_color(class: ElementClass) -> String {
    let hue = class.index() * 360 / ElementClass::COUNT;
    format!("hsl({hue},65%,45%)")
}

pub fn render_svg(index: &ScreenIndex, screen: u32) -> String {
    let tw = f64::from(THUMB_WIDTH) / TILE_COLS as f64;
    let th = f64::from(THUMB_HEIGHT) / TILE_ROWS as f64;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{THUMB_WIDTH}" height="{THUMB_HEIGHT}" viewBox="0 0 {THUMB_WIDTH} {THUMB_HEIGHT}">"#
    );
    let _ = write!(
        svg,
        r##"<title>{}</title><rect width="100%" height="100%" fill="#fafafa" stroke="#999"/>"##,
        index.screen_id(screen)
    );
    for (class, coverage) in index.screen_coverage(screen) {
        let color = class_color(class);
        for cell in &coverage.cells {
            let (r, c) = (usize::from(cell.tile) / TILE_COLS, usize::from(cell.tile) % TILE_COLS);
            let _ = write!(
                svg,
                r#"<rect class="{class}" x="{:.1}" y="{:.1}" width="{tw:.1}" height="{th:.1}" fill="{color}" fill-opacity="{:.3}"><title>{class} A={:.3} C={}</title></rect>"#,
                c as f64 * tw,
                r as f64 * th,
                0.15 + 0.6 * cell.area,
                cell.area,
                cell.count
            );
        }
    }
    svg.push_str("</svg>");
    svg
}
