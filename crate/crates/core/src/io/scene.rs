//! Scene ingestion from graymaps and built-in glyphs.
//!
//! Magnitude maps `v / maxval` onto `[0, 1]`. Phase maps level `v` onto
//! `-pi + 2pi (v + 1) / (maxval + 1)`, a linear lattice covering `(-pi, pi]`
//! whose top level is exactly `pi`.

use std::f64::consts::PI;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use super::config::SceneSource;
use super::glyph;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::SceneObject;

pub const MAXVAL_16: u16 = u16::MAX;

fn image_error(path: &Path, reason: impl ToString) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Reads an 8- or 16-bit graymap as raw levels plus its maxval.
pub fn read_graymap(path: &Path) -> Result<(Grid<u16>, u16)> {
    let img = ImageReader::open(path)
        .map_err(|e| image_error(path, e))?
        .with_guessed_format()
        .map_err(|e| image_error(path, e))?
        .decode()
        .map_err(|e| image_error(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Ok((
            Grid::from_vec(w, h, buf.into_raw().into_iter().map(u16::from).collect())?,
            u8::MAX as u16,
        )),
        DynamicImage::ImageLuma16(buf) => Ok((Grid::from_vec(w, h, buf.into_raw())?, MAXVAL_16)),
        other => Err(image_error(
            path,
            format!("expected a graymap, got {:?}", other.color()),
        )),
    }
}

/// Binary (P5) graymap with maxval 65535, samples big-endian.
pub fn write_graymap16(path: &Path, levels: &Grid<u16>) -> Result<()> {
    // The `image` PNM encoder only writes 8-bit samples.
    let mut out = format!("P5\n{} {}\n{}\n", levels.width(), levels.height(), MAXVAL_16).into_bytes();
    out.extend(levels.iter().flat_map(|v| v.to_be_bytes()));
    std::fs::write(path, out)?;
    Ok(())
}

pub fn magnitude_from_level(v: u16, maxval: u16) -> f64 {
    v as f64 / maxval as f64
}

pub fn level_from_magnitude(m: f64, maxval: u16) -> u16 {
    (m * maxval as f64).round().clamp(0.0, maxval as f64) as u16
}

pub fn phase_from_level(v: u16, maxval: u16) -> f64 {
    let levels = maxval as f64 + 1.0;
    let p = -PI + 2.0 * PI * (v as f64 + 1.0) / levels;
    p.min(PI)
}

pub fn level_from_phase(p: f64, maxval: u16) -> u16 {
    let levels = maxval as f64 + 1.0;
    ((p + PI) * levels / (2.0 * PI) - 1.0).round().clamp(0.0, maxval as f64) as u16
}

pub fn load_scene(source: &SceneSource, base_dir: &Path) -> Result<SceneObject> {
    match source {
        SceneSource::Glyph { name, width, height } => glyph::render(name, *width, *height),
        SceneSource::Images { magnitude, phase } => {
            let mag_path = base_dir.join(magnitude);
            let (mag_levels, mag_max) = read_graymap(&mag_path)?;
            let magnitude = mag_levels.map(|v| magnitude_from_level(*v, mag_max));
            let phase = match phase {
                Some(p) => {
                    let phase_path = base_dir.join(p);
                    let (levels, max) = read_graymap(&phase_path)?;
                    levels.ensure_dims(magnitude.dims())?;
                    levels.map(|v| phase_from_level(*v, max))
                }
                None => Grid::filled(magnitude.width(), magnitude.height(), 0.0),
            };
            SceneObject::from_maps(magnitude, phase)
        }
    }
}

/// Writes a scene as two 16-bit graymaps.
pub fn save_scene(scene: &SceneObject, magnitude: &Path, phase: &Path) -> Result<()> {
    write_graymap16(
        magnitude,
        &scene.magnitude().map(|m| level_from_magnitude(*m, MAXVAL_16)),
    )?;
    write_graymap16(phase, &scene.phase().map(|p| level_from_phase(*p, MAXVAL_16)))
}

/// Noise mask in `[0, 1]` from a graymap.
pub fn load_mask(path: &Path) -> Result<Grid<f64>> {
    let (levels, max) = read_graymap(path)?;
    Ok(levels.map(|v| magnitude_from_level(*v, max)))
}
