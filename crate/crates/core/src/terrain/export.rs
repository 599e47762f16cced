//! 16-bit binary PGM (P5) raster export with a JSON sidecar.
//!
//! Pixels are big-endian, northernmost row first. A value is recovered as
//! `offset + scale * pixel`; pixel 0 is reserved for nodata on surfaces.
//! Masks use pixels {0, 65535}.

use serde::{Deserialize, Serialize};

use super::grid::GridFrame;
use super::mask::ValidLoiterMask;
use super::surface::OffsetSurface;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterSidecar {
    /// World coordinates of the south-west cell center.
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
    pub scale: f64,
    pub offset: f64,
    pub kind: String,
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub d: Option<f64>,
    pub nodata_pixel: Option<u16>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub pgm: Vec<u8>,
    pub sidecar: RasterSidecar,
}

fn encode(frame: &GridFrame, pixel: impl Fn(usize, usize) -> u16) -> Vec<u8> {
    let header = format!("P5\n{} {}\n65535\n", frame.n_cols, frame.n_rows);
    let mut out = Vec::with_capacity(header.len() + frame.len() * 2);
    out.extend_from_slice(header.as_bytes());
    for row in (0..frame.n_rows).rev() {
        for col in 0..frame.n_cols {
            out.extend_from_slice(&pixel(col, row).to_be_bytes());
        }
    }
    out
}

pub fn surface_raster(surface: &OffsetSurface) -> Raster {
    let frame = *surface.frame();
    let (lo, hi) = surface
        .values()
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    // pixels 1..=65535 span [lo, hi]
    let scale = if hi > lo { (hi - lo) / 65534.0 } else { 1.0 };
    let offset = lo - scale;
    let pgm = encode(&frame, |c, r| match surface.value(c, r) {
        Some(v) => (((v - lo) / scale).round() as u32 + 1).min(65535) as u16,
        None => 0,
    });
    Raster {
        pgm,
        sidecar: RasterSidecar {
            origin: frame.origin,
            cell_size: frame.cell_size,
            n_cols: frame.n_cols,
            n_rows: frame.n_rows,
            scale,
            offset,
            kind: surface.kind().as_str().to_string(),
            radius: surface.radius(),
            d: Some(surface.distance()),
            nodata_pixel: Some(0),
        },
    }
}

pub fn mask_raster(mask: &ValidLoiterMask, loiter_radius: f64, d: Option<f64>) -> Raster {
    let frame = *mask.frame();
    let pgm = encode(&frame, |c, r| if mask.is_valid(c, r) { 65535 } else { 0 });
    Raster {
        pgm,
        sidecar: RasterSidecar {
            origin: frame.origin,
            cell_size: frame.cell_size,
            n_cols: frame.n_cols,
            n_rows: frame.n_rows,
            scale: 1.0 / 65535.0,
            offset: 0.0,
            kind: "valid_loiter_mask".to_string(),
            radius: Some(loiter_radius),
            d,
            nodata_pixel: None,
        },
    }
}

/// Parses a raster written by this module back into values, row 0 = south.
pub fn decode_raster(pgm: &[u8], sidecar: &RasterSidecar) -> Option<Vec<f64>> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < pgm.len() && pgm[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < pgm.len() && !pgm[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&pgm[start..pos]).ok()?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return None;
    }
    let cols: usize = fields[1].parse().ok()?;
    let rows: usize = fields[2].parse().ok()?;
    let data = pgm.get(pos..)?;
    if data.len() != cols * rows * 2 {
        return None;
    }
    let mut out = vec![0.0; cols * rows];
    for (i, px) in data.chunks_exact(2).enumerate() {
        let p = u16::from_be_bytes([px[0], px[1]]);
        let (file_row, col) = (i / cols, i % cols);
        let row = rows - 1 - file_row;
        out[row * cols + col] = if sidecar.nodata_pixel == Some(p) {
            f64::NAN
        } else {
            sidecar.offset + sidecar.scale * p as f64
        };
    }
    Some(out)
}
