//! Elevation grids and the safety layers derived from them.

mod dem;
mod export;
mod grid;
mod mask;
mod surface;
mod synthetic;

pub use dem::{load_dem, load_dem_str, to_esri_ascii};
pub use export::{decode_raster, mask_raster, surface_raster, Raster, RasterSidecar};
pub use grid::{ElevationGrid, GridFrame};
pub use mask::{valid_loiter_mask, Corridor, DiskPadding, LoiterOptions, LoiterSurfaces, SurfaceSet, ValidLoiterMask};
pub use surface::{horizontal_offset, offset_surface, DiskMode, OffsetSurface, SurfaceKind};
pub use synthetic::{generate_synthetic, SyntheticTerrain, TerrainShape};
