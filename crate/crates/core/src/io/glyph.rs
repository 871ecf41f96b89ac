//! Built-in binary phase objects.
//!
//! Every glyph has `|R| = 1` on its support. Phase is `pi` on the glyph
//! strokes and `0` on the rest of the support.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::SceneObject;

pub const GLYPHS: &[&str] = &["bars", "iof", "ramp", "uniform"];

// 5x7 bitmaps, one string per row, '#' set.
const LETTER_I: [&str; 7] = ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"];
const LETTER_O: [&str; 7] = [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."];
const LETTER_F: [&str; 7] = ["#####", "#....", "#....", "####.", "#....", "#....", "#...."];

fn inset_support(width: usize, height: usize) -> Grid<bool> {
    let (mx, my) = (width / 8, height / 8);
    Grid::from_fn(width, height, |x, y| {
        x >= mx && x < width - mx && y >= my && y < height - my
    })
}

fn text_strokes(width: usize, height: usize, letters: &[[&str; 7]]) -> Grid<bool> {
    // Letters are 5 cells wide with one blank cell between them, plus a
    // one-cell margin around the whole string.
    let cols = letters.len() * 6 + 1;
    let rows = 9;
    let cell = (width / cols).min(height / rows).max(1);
    let x0 = (width.saturating_sub(cols * cell)) / 2 + cell;
    let y0 = (height.saturating_sub(rows * cell)) / 2 + cell;
    Grid::from_fn(width, height, |x, y| {
        if x < x0 || y < y0 {
            return false;
        }
        let (cx, cy) = ((x - x0) / cell, (y - y0) / cell);
        if cy >= 7 {
            return false;
        }
        let (letter, col) = (cx / 6, cx % 6);
        letter < letters.len() && col < 5 && letters[letter][cy].as_bytes()[col] == b'#'
    })
}

pub fn render(name: &str, width: usize, height: usize) -> Result<SceneObject> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("scene", "glyph dimensions must be positive"));
    }
    let (support, phase) = match name {
        "bars" => {
            let support = inset_support(width, height);
            let period = (width / 8).max(2);
            let phase = Grid::from_fn(width, height, |x, _| if (x / period) % 2 == 1 { PI } else { 0.0 });
            (support, phase)
        }
        "iof" => {
            let support = inset_support(width, height);
            let strokes = text_strokes(width, height, &[LETTER_I, LETTER_O, LETTER_F]);
            (support, strokes.map(|s| if *s { PI } else { 0.0 }))
        }
        "ramp" => {
            let support = Grid::filled(width, height, true);
            let phase = Grid::from_fn(width, height, |x, _| -PI + 2.0 * PI * (x as f64 + 1.0) / width as f64);
            (support, phase)
        }
        "uniform" => (Grid::filled(width, height, true), Grid::filled(width, height, 0.0)),
        other => {
            return Err(Error::invalid(
                "glyph",
                format!("unknown glyph `{other}`, expected one of {GLYPHS:?}"),
            ))
        }
    };
    let magnitude = support.map(|s| if *s { 1.0 } else { 0.0 });
    let phase = Grid::from_fn(width, height, |x, y| if support[(x, y)] { phase[(x, y)] } else { 0.0 });
    SceneObject::new(magnitude, phase, support)
}
