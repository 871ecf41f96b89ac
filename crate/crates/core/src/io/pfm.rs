//! Portable float map, single channel, little-endian (scale `-1.0`).
//!
//! Rows are stored bottom-to-top as the format requires.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub fn encode(grid: &Grid<f64>) -> Vec<u8> {
    let (w, h) = grid.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for y in (0..h).rev() {
        for v in grid.row(y) {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

pub fn write(path: &Path, grid: &Grid<f64>) -> Result<()> {
    fs::write(path, encode(grid))?;
    Ok(())
}

fn header_token<'a>(rest: &mut &'a [u8]) -> Option<&'a str> {
    let start = rest.iter().position(|b| !b.is_ascii_whitespace())?;
    let len = rest[start..]
        .iter()
        .position(|b| b.is_ascii_whitespace())
        .unwrap_or(rest.len() - start);
    let tok = std::str::from_utf8(&rest[start..start + len]).ok()?;
    // exactly one whitespace byte separates the header from the raster
    *rest = rest.get(start + len + 1..).unwrap_or(&[]);
    Some(tok)
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Grid<f64>, String> {
    let mut rest = bytes;
    let magic = header_token(&mut rest).ok_or("missing magic")?;
    if magic != "Pf" {
        return Err(format!("unsupported magic `{magic}`"));
    }
    let mut num = |what: &str| -> std::result::Result<f64, String> {
        header_token(&mut rest)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("bad {what}"))
    };
    let w = num("width")? as usize;
    let h = num("height")? as usize;
    let scale = num("scale")?;
    let need = 4 * w * h;
    if rest.len() != need {
        return Err(format!("expected {need} raster bytes, found {}", rest.len()));
    }
    let read = |b: &[u8]| {
        let arr = [b[0], b[1], b[2], b[3]];
        if scale < 0.0 {
            f32::from_le_bytes(arr)
        } else {
            f32::from_be_bytes(arr)
        }
    };
    let mut data = vec![0.0; w * h];
    for (k, chunk) in rest.chunks_exact(4).enumerate() {
        let (row, x) = (k / w.max(1), k % w.max(1));
        data[(h - 1 - row) * w + x] = read(chunk) as f64;
    }
    Grid::from_vec(w, h, data).map_err(|e| e.to_string())
}

pub fn read(path: &Path) -> Result<Grid<f64>> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|reason| Error::Image {
        path: path.to_path_buf(),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_layout() {
        let g = Grid::from_fn(2, 2, |x, y| (x + 10 * y) as f64);
        let bytes = encode(&g);
        assert!(bytes.starts_with(b"Pf\n2 2\n-1.0\n"));
        let raster = &bytes[b"Pf\n2 2\n-1.0\n".len()..];
        // bottom row (y = 1) first
        assert_eq!(&raster[..4], &10f32.to_le_bytes());
        assert_eq!(decode(&bytes).unwrap(), g);
    }

    #[test]
    fn rejects_truncated() {
        let mut bytes = encode(&Grid::filled(3, 3, 1.0));
        bytes.pop();
        assert!(decode(&bytes).is_err());
        assert!(decode(b"PF\n1 1\n-1.0\n0000").is_err());
    }
}
