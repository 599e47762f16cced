//! Deterministic analytic terrains for tests and desk-scale benchmarks.

use serde::{Deserialize, Serialize};

use super::grid::{ElevationGrid, GridFrame};
use crate::error::TerrainError;

/// Analytic height profile. Positions of features (cone apex, cliff,
/// ridge) are given relative to the map center unless stated otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainShape {
    Flat {
        height: f64,
    },
    /// `base + slope_x * x + slope_y * y` in world coordinates.
    Ramp {
        slope_x: f64,
        #[serde(default)]
        slope_y: f64,
        #[serde(default)]
        base: f64,
    },
    Cone {
        peak: f64,
        radius: f64,
    },
    /// Terrain jumps from 0 to `height` where `x - center_x >= offset`.
    StepCliff {
        height: f64,
        #[serde(default)]
        offset: f64,
    },
    /// A basin running along x with side walls of `depth`, split across the
    /// middle by a ridge of height `ridge` that drops to `saddle` at the
    /// valley axis.
    Valley {
        depth: f64,
        ridge: f64,
        saddle: f64,
        floor_half_width: f64,
        wall_width: f64,
        ridge_half_width: f64,
        saddle_half_width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTerrain {
    /// Width and height covered by cell centers, meters.
    pub extent: [f64; 2],
    pub cell_size: f64,
    #[serde(default)]
    pub origin: [f64; 2],
    pub shape: TerrainShape,
}

impl SyntheticTerrain {
    pub fn new(extent: [f64; 2], cell_size: f64, shape: TerrainShape) -> Self {
        Self { extent, cell_size, origin: [0.0, 0.0], shape }
    }

    pub fn frame(&self) -> Result<GridFrame, TerrainError> {
        if !(self.cell_size > 0.0) {
            return Err(TerrainError::Parameter(format!("cell size must be positive, got {}", self.cell_size)));
        }
        if !(self.extent[0] > 0.0 && self.extent[1] > 0.0) {
            return Err(TerrainError::Parameter(format!("extent must be positive, got {:?}", self.extent)));
        }
        let n_cols = (self.extent[0] / self.cell_size).round() as usize + 1;
        let n_rows = (self.extent[1] / self.cell_size).round() as usize + 1;
        GridFrame::new(self.origin, self.cell_size, n_cols, n_rows)
    }

    pub fn generate(&self) -> Result<ElevationGrid, TerrainError> {
        let frame = self.frame()?;
        let [w, h] = frame.extent();
        let center = [self.origin[0] + w / 2.0, self.origin[1] + h / 2.0];
        match self.shape {
            TerrainShape::Flat { height } => ElevationGrid::from_fn(frame, |_, _| height),
            TerrainShape::Ramp { slope_x, slope_y, base } => {
                ElevationGrid::from_fn(frame, |x, y| base + slope_x * x + slope_y * y)
            }
            TerrainShape::Cone { peak, radius } => {
                if !(radius > 0.0) {
                    return Err(TerrainError::Parameter("cone radius must be positive".into()));
                }
                ElevationGrid::from_fn(frame, |x, y| {
                    let r = (x - center[0]).hypot(y - center[1]);
                    peak * (1.0 - r / radius).max(0.0)
                })
            }
            TerrainShape::StepCliff { height, offset } => {
                ElevationGrid::from_fn(frame, |x, _| if x - center[0] >= offset { height } else { 0.0 })
            }
            TerrainShape::Valley {
                depth,
                ridge,
                saddle,
                floor_half_width,
                wall_width,
                ridge_half_width,
                saddle_half_width,
            } => {
                if !(wall_width > 0.0 && ridge_half_width > 0.0 && saddle_half_width > 0.0) {
                    return Err(TerrainError::Parameter("valley widths must be positive".into()));
                }
                ElevationGrid::from_fn(frame, |x, y| {
                    let across = (y - center[1]).abs();
                    let along = (x - center[0]).abs();
                    let wall = depth * ((across - floor_half_width) / wall_width).clamp(0.0, 1.0);
                    let crest = saddle + (ridge - saddle) * (across / saddle_half_width).min(1.0);
                    let ridge_h = crest * (1.0 - along / ridge_half_width).max(0.0);
                    wall.max(ridge_h)
                })
            }
        }
    }
}

/// Convenience wrapper matching the batch tooling's vocabulary.
pub fn generate_synthetic(spec: &SyntheticTerrain) -> Result<ElevationGrid, TerrainError> {
    spec.generate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_constant() {
        let g = SyntheticTerrain::new([630.0, 630.0], 10.0, TerrainShape::Flat { height: 0.0 })
            .generate()
            .unwrap();
        assert_eq!(g.frame().n_cols, 64);
        assert_eq!(g.frame().n_rows, 64);
        assert!(g.heights().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn ramp_is_analytic() {
        let g = SyntheticTerrain::new([500.0, 200.0], 10.0, TerrainShape::Ramp { slope_x: 0.1, slope_y: 0.0, base: 0.0 })
            .generate()
            .unwrap();
        for r in 0..g.frame().n_rows {
            for c in 0..g.frame().n_cols {
                let [x, _] = g.frame().world(c, r);
                assert!((g.height(c, r).unwrap() - 0.1 * x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn valley_saddle_height() {
        let g = SyntheticTerrain::new(
            [4000.0, 2000.0],
            20.0,
            TerrainShape::Valley {
                depth: 300.0,
                ridge: 250.0,
                saddle: 120.0,
                floor_half_width: 500.0,
                wall_width: 300.0,
                ridge_half_width: 800.0,
                saddle_half_width: 150.0,
            },
        )
        .generate()
        .unwrap();
        let f = g.frame();
        assert_eq!(g.height(f.n_cols / 2, f.n_rows / 2), Some(120.0));
        // both basin floors are flat and low
        assert_eq!(g.height(5, f.n_rows / 2), Some(0.0));
        assert_eq!(g.height(f.n_cols - 6, f.n_rows / 2), Some(0.0));
        // the ridge away from the saddle is higher than the saddle
        let off_axis = f.n_rows / 2 + 10;
        assert!(g.height(f.n_cols / 2, off_axis).unwrap() > 200.0);
    }

    #[test]
    fn bad_parameters() {
        let flat = TerrainShape::Flat { height: 0.0 };
        assert!(SyntheticTerrain::new([0.0, 10.0], 1.0, flat.clone()).generate().is_err());
        assert!(SyntheticTerrain::new([10.0, 10.0], -1.0, flat).generate().is_err());
    }
}
