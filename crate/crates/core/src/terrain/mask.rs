//! Loiter surfaces, the valid-loiter mask and the bundled [`SurfaceSet`].

use serde::{Deserialize, Serialize};

use super::grid::{ElevationGrid, GridFrame};
use super::surface::{horizontal_offset, offset_surface, DiskMode, OffsetSurface, SurfaceKind};
use crate::error::TerrainError;

/// Altitude band above terrain the vehicle must stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub min_distance: f64,
    pub max_distance: f64,
}

impl Corridor {
    pub fn new(min_distance: f64, max_distance: f64) -> Result<Self, TerrainError> {
        if !(min_distance >= 0.0 && max_distance > min_distance) {
            return Err(TerrainError::Parameter(format!(
                "corridor needs 0 <= min < max, got {min_distance}/{max_distance}"
            )));
        }
        Ok(Self { min_distance, max_distance })
    }
}

impl Default for Corridor {
    fn default() -> Self {
        Self { min_distance: 50.0, max_distance: 120.0 }
    }
}

/// Extra disk radius added on top of the loiter radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "meters")]
pub enum DiskPadding {
    /// `1.5·√2·cell_size`: covers the bilinear support of every circle
    /// point when the center is looked up at its nearest cell, so a valid
    /// mask cell certifies the interpolated circle.
    Interpolation,
    /// Bare loiter radius.
    None,
    Meters(f64),
}

impl DiskPadding {
    pub fn meters(self, cell_size: f64) -> f64 {
        match self {
            Self::Interpolation => 1.5 * std::f64::consts::SQRT_2 * cell_size,
            Self::None => 0.0,
            Self::Meters(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoiterOptions {
    pub radius: f64,
    pub padding: DiskPadding,
    /// Mark the outer band of width `max(d⁺, R)` invalid.
    pub edge_margin: bool,
}

impl LoiterOptions {
    pub fn new(radius: f64) -> Self {
        Self { radius, padding: DiskPadding::Interpolation, edge_margin: false }
    }
}

/// Per-cell boolean set of positions where some altitude admits a safe loiter.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidLoiterMask {
    frame: GridFrame,
    radius: f64,
    valid: Vec<bool>,
}

impl ValidLoiterMask {
    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    /// Disk radius of the generating surfaces.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn cells(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, col: usize, row: usize) -> bool {
        self.valid[self.frame.index(col, row)]
    }

    pub fn is_valid_at(&self, x: f64, y: f64) -> bool {
        self.frame.nearest_cell(x, y).is_some_and(|(c, r)| self.is_valid(c, r))
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn valid_fraction(&self) -> f64 {
        self.valid_count() as f64 / self.valid.len() as f64
    }

    /// Valid cell closest to `(x, y)` as `(col, row, distance)`.
    pub fn nearest_valid(&self, x: f64, y: f64) -> Option<(usize, usize, f64)> {
        self.valid
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| {
                let (c, r) = self.frame.cell_of(i);
                let [cx, cy] = self.frame.world(c, r);
                (c, r, (cx - x).hypot(cy - y))
            })
            .min_by(|a, b| a.2.total_cmp(&b.2))
    }

    fn apply_edge_margin(&mut self, width: f64) {
        let [x0, y0, x1, y1] = self.frame.bounds();
        for i in 0..self.valid.len() {
            let (c, r) = self.frame.cell_of(i);
            let [x, y] = self.frame.world(c, r);
            let edge = (x - x0).min(x1 - x).min(y - y0).min(y1 - y);
            if edge < width {
                self.valid[i] = false;
            }
        }
    }
}

/// `valid(m) ⇔ H⁺(m) > H⁻(m)`; nodata is invalid.
pub fn valid_loiter_mask(h_plus: &OffsetSurface, h_minus: &OffsetSurface) -> Result<ValidLoiterMask, TerrainError> {
    if h_plus.kind() != SurfaceKind::HorizontalMin {
        return Err(TerrainError::KindMismatch { expected: "horizontal_min", found: h_plus.kind().as_str() });
    }
    if h_minus.kind() != SurfaceKind::HorizontalMax {
        return Err(TerrainError::KindMismatch { expected: "horizontal_max", found: h_minus.kind().as_str() });
    }
    if h_plus.frame() != h_minus.frame() {
        return Err(TerrainError::FrameMismatch);
    }
    let (rp, rm) = (h_plus.radius().unwrap_or(f64::NAN), h_minus.radius().unwrap_or(f64::NAN));
    if rp != rm {
        return Err(TerrainError::RadiusMismatch { expected: rm, found: rp });
    }
    let valid = h_plus.values().iter().zip(h_minus.values()).map(|(p, m)| p > m).collect();
    Ok(ValidLoiterMask { frame: *h_plus.frame(), radius: rp, valid })
}

/// Horizontal offsets of both corridor bounds for one loiter radius.
#[derive(Debug, Clone, PartialEq)]
pub struct LoiterSurfaces {
    radius: f64,
    padding: f64,
    h_plus: OffsetSurface,
    h_minus: OffsetSurface,
    mask: ValidLoiterMask,
}

impl LoiterSurfaces {
    pub fn build(
        d_plus: &OffsetSurface,
        d_minus: &OffsetSurface,
        options: &LoiterOptions,
    ) -> Result<Self, TerrainError> {
        if !(options.radius > 0.0) {
            return Err(TerrainError::Parameter(format!("loiter radius must be positive, got {}", options.radius)));
        }
        if d_plus.frame() != d_minus.frame() {
            return Err(TerrainError::FrameMismatch);
        }
        let padding = options.padding.meters(d_plus.frame().cell_size);
        let disk = options.radius + padding;
        let h_plus = horizontal_offset(d_plus, disk, DiskMode::Min)?;
        let h_minus = horizontal_offset(d_minus, disk, DiskMode::Max)?;
        Self::from_horizontal(h_plus, h_minus, options)
    }

    /// Rebuilds the mask from stored horizontal offsets. Their disk radius
    /// must equal `R` plus the padding of `options`.
    pub fn from_horizontal(
        h_plus: OffsetSurface,
        h_minus: OffsetSurface,
        options: &LoiterOptions,
    ) -> Result<Self, TerrainError> {
        let padding = options.padding.meters(h_plus.frame().cell_size);
        let disk = options.radius + padding;
        for layer in [&h_plus, &h_minus] {
            let found = layer.radius().unwrap_or(f64::NAN);
            if (found - disk).abs() > 1e-9 {
                return Err(TerrainError::RadiusMismatch { expected: disk, found });
            }
        }
        let mut mask = valid_loiter_mask(&h_plus, &h_minus)?;
        if options.edge_margin {
            mask.apply_edge_margin(h_plus.distance().max(options.radius));
        }
        Ok(Self { radius: options.radius, padding, h_plus, h_minus, mask })
    }

    /// Loiter radius these surfaces certify.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn padding(&self) -> f64 {
        self.padding
    }

    pub fn h_plus(&self) -> &OffsetSurface {
        &self.h_plus
    }

    pub fn h_minus(&self) -> &OffsetSurface {
        &self.h_minus
    }

    pub fn mask(&self) -> &ValidLoiterMask {
        &self.mask
    }

    /// Loiter altitude at `xy`: midpoint of the two horizontal offsets,
    /// bilinearly interpolated. Fails on invalid positions.
    pub fn goal_altitude(&self, xy: [f64; 2]) -> Result<f64, TerrainError> {
        let [x, y] = xy;
        let frame = self.mask.frame();
        if !frame.contains(x, y) {
            return Err(TerrainError::OutOfExtent { x, y });
        }
        if !self.mask.is_valid_at(x, y) {
            return Err(TerrainError::InvalidLoiterPosition { x, y });
        }
        let plus = self.h_plus.interpolate(x, y);
        let minus = self.h_minus.interpolate(x, y);
        match (plus, minus) {
            (Some(p), Some(m)) => Ok((p + m) / 2.0),
            _ => Err(TerrainError::InvalidLoiterPosition { x, y }),
        }
    }

    /// Center of the cell nearest to `xy`.
    pub fn snap(&self, xy: [f64; 2]) -> Result<[f64; 2], TerrainError> {
        let frame = self.mask.frame();
        let (c, r) = frame
            .nearest_cell(xy[0], xy[1])
            .ok_or(TerrainError::OutOfExtent { x: xy[0], y: xy[1] })?;
        Ok(frame.world(c, r))
    }
}

/// All layers derived from one elevation grid for one corridor and radius.
#[derive(Debug, Clone)]
pub struct SurfaceSet {
    terrain: ElevationGrid,
    corridor: Corridor,
    d_minus: OffsetSurface,
    d_plus: OffsetSurface,
    loiter: LoiterSurfaces,
}

impl SurfaceSet {
    pub fn build(terrain: ElevationGrid, corridor: Corridor, loiter: &LoiterOptions) -> Result<Self, TerrainError> {
        let corridor = Corridor::new(corridor.min_distance, corridor.max_distance)?;
        let d_minus = offset_surface(&terrain, corridor.min_distance, SurfaceKind::MinDistance)?;
        let d_plus = offset_surface(&terrain, corridor.max_distance, SurfaceKind::MaxDistance)?;
        let loiter = LoiterSurfaces::build(&d_plus, &d_minus, loiter)?;
        Ok(Self { terrain, corridor, d_minus, d_plus, loiter })
    }

    /// Assembles a set from previously computed layers (e.g. a disk cache).
    pub fn from_layers(
        terrain: ElevationGrid,
        corridor: Corridor,
        d_minus: OffsetSurface,
        d_plus: OffsetSurface,
        loiter: &LoiterOptions,
    ) -> Result<Self, TerrainError> {
        if d_minus.frame() != terrain.frame() || d_plus.frame() != terrain.frame() {
            return Err(TerrainError::FrameMismatch);
        }
        let loiter = LoiterSurfaces::build(&d_plus, &d_minus, loiter)?;
        Ok(Self { terrain, corridor, d_minus, d_plus, loiter })
    }

    /// Assembles a set from fully precomputed layers.
    pub fn from_parts(
        terrain: ElevationGrid,
        corridor: Corridor,
        d_minus: OffsetSurface,
        d_plus: OffsetSurface,
        loiter: LoiterSurfaces,
    ) -> Result<Self, TerrainError> {
        let frame = terrain.frame();
        if d_minus.frame() != frame || d_plus.frame() != frame || loiter.mask().frame() != frame {
            return Err(TerrainError::FrameMismatch);
        }
        Ok(Self { terrain, corridor, d_minus, d_plus, loiter })
    }

    pub fn terrain(&self) -> &ElevationGrid {
        &self.terrain
    }

    pub fn frame(&self) -> &GridFrame {
        self.terrain.frame()
    }

    pub fn corridor(&self) -> Corridor {
        self.corridor
    }

    pub fn d_minus(&self) -> &OffsetSurface {
        &self.d_minus
    }

    pub fn d_plus(&self) -> &OffsetSurface {
        &self.d_plus
    }

    pub fn loiter(&self) -> &LoiterSurfaces {
        &self.loiter
    }

    pub fn mask(&self) -> &ValidLoiterMask {
        self.loiter.mask()
    }

    /// Strict corridor containment at one position.
    pub fn in_corridor(&self, x: f64, y: f64, z: f64) -> bool {
        match (self.d_minus.interpolate(x, y), self.d_plus.interpolate(x, y)) {
            (Some(lo), Some(hi)) => lo < z && z < hi,
            _ => false,
        }
    }

    /// `(D⁻, D⁺)` at `(x, y)`, or `None` outside the map / on nodata.
    pub fn bounds_at(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        Some((self.d_minus.interpolate(x, y)?, self.d_plus.interpolate(x, y)?))
    }
}
