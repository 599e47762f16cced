//! Offset collision surfaces and their horizontal disk offsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{ElevationGrid, GridFrame};
use crate::error::TerrainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    /// Lower corridor bound, clearance `d⁻` above terrain.
    MinDistance,
    /// Upper corridor bound, clearance `d⁺` above terrain.
    MaxDistance,
    /// Disk minimum of the upper bound (loiter ceiling).
    HorizontalMin,
    /// Disk maximum of the lower bound (loiter floor).
    HorizontalMax,
}

impl SurfaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MinDistance => "min_distance",
            Self::MaxDistance => "max_distance",
            Self::HorizontalMin => "horizontal_min",
            Self::HorizontalMax => "horizontal_max",
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Self::HorizontalMin | Self::HorizontalMax)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskMode {
    Max,
    Min,
}

/// An altitude layer in the frame of its source grid. NaN marks nodata.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetSurface {
    frame: GridFrame,
    values: Vec<f64>,
    kind: SurfaceKind,
    distance: f64,
    radius: Option<f64>,
}

impl OffsetSurface {
    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Terrain clearance `d` the surface was built from.
    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Disk radius of a horizontal offset, `None` for clearance surfaces.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn value(&self, col: usize, row: usize) -> Option<f64> {
        let v = self.values[self.frame.index(col, row)];
        v.is_finite().then_some(v)
    }

    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        self.frame.interpolate(&self.values, x, y)
    }

    /// Value at the cell nearest to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> Option<f64> {
        let (c, r) = self.frame.nearest_cell(x, y)?;
        self.value(c, r)
    }

    /// Rebuilds a layer from stored values, e.g. a disk cache.
    pub fn from_values(
        frame: GridFrame,
        values: Vec<f64>,
        kind: SurfaceKind,
        distance: f64,
        radius: Option<f64>,
    ) -> Result<Self, TerrainError> {
        if values.len() != frame.len() {
            return Err(TerrainError::Parameter(format!(
                "surface has {} values for a {}x{} grid",
                values.len(),
                frame.n_cols,
                frame.n_rows
            )));
        }
        if kind.is_horizontal() != radius.is_some() {
            return Err(TerrainError::Parameter("disk radius must be given exactly for horizontal offsets".into()));
        }
        Ok(Self { frame, values, kind, distance, radius })
    }

    pub(crate) fn from_parts(
        frame: GridFrame,
        values: Vec<f64>,
        kind: SurfaceKind,
        distance: f64,
        radius: Option<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), frame.len());
        Self { frame, values, kind, distance, radius }
    }
}

/// Cell offsets `(dc, dr)` with center distance `<= radius`, paired with
/// the squared distance in meters.
fn disk_offsets(cell_size: f64, radius: f64) -> Vec<(isize, isize, f64)> {
    let reach = (radius / cell_size).floor() as isize;
    let r2 = radius * radius;
    let mut out = Vec::new();
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let dx = dc as f64 * cell_size;
            let dy = dr as f64 * cell_size;
            let d2 = dx * dx + dy * dy;
            if d2 <= r2 {
                out.push((dc, dr, d2));
            }
        }
    }
    out
}

/// Applies `reduce` over every in-map neighbor in `offsets`, per cell, in
/// parallel rows. A nodata neighbor makes the cell nodata.
fn sweep<T: Sync>(
    frame: &GridFrame,
    offsets: &[(isize, isize, T)],
    source: &[f64],
    init: f64,
    reduce: impl Fn(f64, f64, &T) -> f64 + Sync,
) -> Vec<f64> {
    let cols = frame.n_cols as isize;
    let rows = frame.n_rows as isize;
    let mut out = vec![0.0; frame.len()];
    out.par_chunks_mut(frame.n_cols).enumerate().for_each(|(row, line)| {
        let row = row as isize;
        for (col, slot) in line.iter_mut().enumerate() {
            let col = col as isize;
            let mut acc = init;
            for (dc, dr, extra) in offsets {
                let c = col + dc;
                let r = row + dr;
                if c < 0 || r < 0 || c >= cols || r >= rows {
                    continue;
                }
                let v = source[(r * cols + c) as usize];
                if v.is_nan() {
                    acc = f64::NAN;
                    break;
                }
                acc = reduce(acc, v, extra);
            }
            *slot = acc;
        }
    });
    out
}

/// Terrain clearance surface: at every cell the lowest altitude whose
/// distance to all terrain cell centers within `d` is at least `d`.
///
/// `value(m) = max_{|m - m'| <= d} H(m') + sqrt(d² - |m - m'|²)`.
pub fn offset_surface(grid: &ElevationGrid, d: f64, kind: SurfaceKind) -> Result<OffsetSurface, TerrainError> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(TerrainError::Parameter(format!("offset distance must be >= 0, got {d}")));
    }
    if kind.is_horizontal() {
        return Err(TerrainError::KindMismatch { expected: "clearance surface", found: kind.as_str() });
    }
    let frame = *grid.frame();
    let [w, h] = frame.extent();
    if d > w.min(h) / 2.0 {
        log::warn!("offset distance {d} m exceeds half the map extent; edge cells are truncated by the boundary");
    }
    let d2 = d * d;
    let offsets: Vec<(isize, isize, f64)> = disk_offsets(frame.cell_size, d)
        .into_iter()
        .map(|(dc, dr, r2)| (dc, dr, (d2 - r2).max(0.0).sqrt()))
        .collect();
    let values = sweep(&frame, &offsets, grid.heights(), f64::NEG_INFINITY, |acc, h, bump| acc.max(h + bump));
    Ok(OffsetSurface::from_parts(frame, values, kind, d, None))
}

/// Disk maximum (`DiskMode::Max`) or minimum (`DiskMode::Min`) of a
/// clearance surface over the closed disk of `radius` around each cell.
pub fn horizontal_offset(surface: &OffsetSurface, radius: f64, mode: DiskMode) -> Result<OffsetSurface, TerrainError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(TerrainError::Parameter(format!("disk radius must be >= 0, got {radius}")));
    }
    if surface.kind.is_horizontal() {
        return Err(TerrainError::KindMismatch { expected: "clearance surface", found: surface.kind.as_str() });
    }
    let frame = surface.frame;
    let offsets: Vec<(isize, isize, ())> =
        disk_offsets(frame.cell_size, radius).into_iter().map(|(dc, dr, _)| (dc, dr, ())).collect();
    let (values, kind) = match mode {
        DiskMode::Max => (
            sweep(&frame, &offsets, &surface.values, f64::NEG_INFINITY, |acc, v, _| acc.max(v)),
            SurfaceKind::HorizontalMax,
        ),
        DiskMode::Min => (
            sweep(&frame, &offsets, &surface.values, f64::INFINITY, |acc, v, _| acc.min(v)),
            SurfaceKind::HorizontalMin,
        ),
    };
    Ok(OffsetSurface::from_parts(frame, values, kind, surface.distance, Some(radius)))
}
