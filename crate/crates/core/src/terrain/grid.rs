use serde::{Deserialize, Serialize};

use crate::error::TerrainError;

/// Geometry shared by an elevation grid and every layer derived from it.
///
/// Cell `(col, row)` has its center at `origin + (col, row) * cell_size`;
/// row 0 is the southernmost row and `y` grows with the row index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
}

impl GridFrame {
    pub fn new(origin: [f64; 2], cell_size: f64, n_cols: usize, n_rows: usize) -> Result<Self, TerrainError> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(TerrainError::Parameter(format!("cell size must be positive, got {cell_size}")));
        }
        if n_cols < 2 || n_rows < 2 {
            return Err(TerrainError::Parameter(format!(
                "grid needs at least 2x2 cells, got {n_cols}x{n_rows}"
            )));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(TerrainError::Parameter("origin must be finite".into()));
        }
        Ok(Self { origin, cell_size, n_cols, n_rows })
    }

    pub fn len(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.n_cols + col
    }

    #[inline]
    pub fn cell_of(&self, index: usize) -> (usize, usize) {
        (index % self.n_cols, index / self.n_cols)
    }

    /// World coordinates of a cell center.
    #[inline]
    pub fn world(&self, col: usize, row: usize) -> [f64; 2] {
        [
            self.origin[0] + col as f64 * self.cell_size,
            self.origin[1] + row as f64 * self.cell_size,
        ]
    }

    /// Cell whose center is nearest to `(x, y)`, or `None` outside the extent.
    pub fn nearest_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = ((x - self.origin[0]) / self.cell_size).round();
        let fy = ((y - self.origin[1]) / self.cell_size).round();
        if fx < 0.0 || fy < 0.0 || fx >= self.n_cols as f64 || fy >= self.n_rows as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    /// Axis-aligned bounds spanned by the cell centers: `[x_min, y_min, x_max, y_max]`.
    pub fn bounds(&self) -> [f64; 4] {
        let far = self.world(self.n_cols - 1, self.n_rows - 1);
        [self.origin[0], self.origin[1], far[0], far[1]]
    }

    /// True when bilinear interpolation is defined at `(x, y)`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [x0, y0, x1, y1] = self.bounds();
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }

    pub fn extent(&self) -> [f64; 2] {
        [
            (self.n_cols - 1) as f64 * self.cell_size,
            (self.n_rows - 1) as f64 * self.cell_size,
        ]
    }

    pub fn diagonal(&self) -> f64 {
        let [w, h] = self.extent();
        w.hypot(h)
    }

    /// Bilinear interpolation of `values` (laid out in this frame) at `(x, y)`.
    ///
    /// Returns `None` outside the extent or when a corner with non-zero
    /// weight holds nodata (NaN).
    pub fn interpolate(&self, values: &[f64], x: f64, y: f64) -> Option<f64> {
        if !self.contains(x, y) {
            return None;
        }
        let fx = (x - self.origin[0]) / self.cell_size;
        let fy = (y - self.origin[1]) / self.cell_size;
        let col = (fx.floor() as usize).min(self.n_cols - 2);
        let row = (fy.floor() as usize).min(self.n_rows - 2);
        let tx = (fx - col as f64).clamp(0.0, 1.0);
        let ty = (fy - row as f64).clamp(0.0, 1.0);
        let at = |c: usize, r: usize| values[self.index(c, r)];
        let south = lerp(at(col, row), at(col + 1, row), tx);
        let north = lerp(at(col, row + 1), at(col + 1, row + 1), tx);
        let v = lerp(south, north, ty);
        v.is_finite().then_some(v)
    }
}

/// Linear interpolation that never touches the unused endpoint, so nodata
/// next to an exact grid node does not leak in.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        a + (b - a) * t
    }
}

/// 2.5D height field. Nodata cells are stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationGrid {
    frame: GridFrame,
    heights: Vec<f64>,
    nodata_value: Option<f64>,
}

impl ElevationGrid {
    /// Builds a grid from row-major heights (row 0 = south). `NaN` marks nodata.
    pub fn new(frame: GridFrame, heights: Vec<f64>) -> Result<Self, TerrainError> {
        if heights.len() != frame.len() {
            return Err(TerrainError::Parameter(format!(
                "expected {} heights, got {}",
                frame.len(),
                heights.len()
            )));
        }
        if heights.iter().any(|h| h.is_infinite()) {
            return Err(TerrainError::Parameter("heights must be finite or nodata".into()));
        }
        Ok(Self { frame, heights, nodata_value: None })
    }

    pub fn from_fn(frame: GridFrame, f: impl Fn(f64, f64) -> f64) -> Result<Self, TerrainError> {
        let heights = (0..frame.len())
            .map(|i| {
                let (c, r) = frame.cell_of(i);
                let [x, y] = frame.world(c, r);
                f(x, y)
            })
            .collect();
        Self::new(frame, heights)
    }

    pub(crate) fn with_nodata_value(mut self, value: Option<f64>) -> Self {
        self.nodata_value = value;
        self
    }

    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Sentinel used by the source file, if any.
    pub fn nodata_value(&self) -> Option<f64> {
        self.nodata_value
    }

    pub fn height(&self, col: usize, row: usize) -> Option<f64> {
        let h = self.heights[self.frame.index(col, row)];
        h.is_finite().then_some(h)
    }

    pub fn is_nodata(&self, col: usize, row: usize) -> bool {
        self.height(col, row).is_none()
    }

    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        self.frame.interpolate(&self.heights, x, y)
    }

    /// Same grid with every height shifted by `dh`.
    pub fn shifted(&self, dh: f64) -> Self {
        Self {
            frame: self.frame,
            heights: self.heights.iter().map(|h| h + dh).collect(),
            nodata_value: self.nodata_value,
        }
    }
}
