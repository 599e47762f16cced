//! On-disk cache of the four derived layers of a [`SurfaceSet`].
//!
//! An entry is a JSON header plus a raw little-endian `f64` blob holding
//! `d_minus`, `d_plus`, `h_plus` and `h_minus` back to back. The key hashes
//! the elevation grid bytes together with every parameter that changes the
//! layers, so a stale entry can only be hit by a hash collision.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use terrain_planner::terrain::{
    Corridor, ElevationGrid, GridFrame, LoiterOptions, LoiterSurfaces, OffsetSurface, SurfaceKind, SurfaceSet,
};

const FORMAT: u32 = 1;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Header {
    format: u32,
    dem_sha256: String,
    min_distance: f64,
    max_distance: f64,
    radius: f64,
    disk_radius: f64,
    frame: GridFrame,
}

pub struct SurfaceCache {
    dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl SurfaceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn default_dir() -> Option<PathBuf> {
        std::env::var_os("HOME").map(|h| Path::new(&h).join(".cache").join("terrain-plan"))
    }

    fn header(dem_sha256: &str, grid: &ElevationGrid, corridor: Corridor, options: &LoiterOptions) -> Header {
        let frame = *grid.frame();
        Header {
            format: FORMAT,
            dem_sha256: dem_sha256.to_string(),
            min_distance: corridor.min_distance,
            max_distance: corridor.max_distance,
            radius: options.radius,
            disk_radius: options.radius + options.padding.meters(frame.cell_size),
            frame,
        }
    }

    fn key(header: &Header) -> String {
        let text = serde_json::to_string(header).expect("cache header serializes");
        sha256_hex(text.as_bytes())[..32].to_string()
    }

    /// Loads the layers from the cache, or builds and stores them.
    /// Cache read and write failures only cost a rebuild.
    pub fn load_or_build(
        &self,
        dem_sha256: &str,
        grid: ElevationGrid,
        corridor: Corridor,
        options: &LoiterOptions,
    ) -> Result<(SurfaceSet, bool)> {
        let header = Self::header(dem_sha256, &grid, corridor, options);
        let key = Self::key(&header);
        let json_path = self.dir.join(format!("{key}.json"));
        let bin_path = self.dir.join(format!("{key}.bin"));
        match self.read(&header, &json_path, &bin_path, grid.clone(), corridor, options) {
            Ok(Some(set)) => {
                log::info!("surface cache hit {key}");
                return Ok((set, true));
            }
            Ok(None) => {}
            Err(e) => log::warn!("ignoring unreadable cache entry {key}: {e:#}"),
        }
        let set = SurfaceSet::build(grid, corridor, options)?;
        if let Err(e) = self.write(&header, &json_path, &bin_path, &set) {
            log::warn!("could not write cache entry {key}: {e:#}");
        }
        Ok((set, false))
    }

    fn read(
        &self,
        header: &Header,
        json_path: &Path,
        bin_path: &Path,
        grid: ElevationGrid,
        corridor: Corridor,
        options: &LoiterOptions,
    ) -> Result<Option<SurfaceSet>> {
        if !json_path.exists() || !bin_path.exists() {
            return Ok(None);
        }
        let stored: Header = serde_json::from_slice(&fs::read(json_path)?)?;
        if &stored != header {
            bail!("header does not match its key");
        }
        let blob = fs::read(bin_path)?;
        let n = header.frame.len();
        if blob.len() != 4 * n * 8 {
            bail!("blob has {} bytes, expected {}", blob.len(), 4 * n * 8);
        }
        let mut layers = blob.chunks_exact(n * 8).map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                .collect::<Vec<_>>()
        });
        let mut next = || layers.next().expect("four layers");
        let frame = header.frame;
        let d_minus = OffsetSurface::from_values(frame, next(), SurfaceKind::MinDistance, corridor.min_distance, None)?;
        let d_plus = OffsetSurface::from_values(frame, next(), SurfaceKind::MaxDistance, corridor.max_distance, None)?;
        let disk = Some(header.disk_radius);
        let h_plus = OffsetSurface::from_values(frame, next(), SurfaceKind::HorizontalMin, corridor.max_distance, disk)?;
        let h_minus =
            OffsetSurface::from_values(frame, next(), SurfaceKind::HorizontalMax, corridor.min_distance, disk)?;
        let loiter = LoiterSurfaces::from_horizontal(h_plus, h_minus, options)?;
        Ok(Some(SurfaceSet::from_parts(grid, corridor, d_minus, d_plus, loiter)?))
    }

    fn write(&self, header: &Header, json_path: &Path, bin_path: &Path, set: &SurfaceSet) -> Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let layers = [set.d_minus(), set.d_plus(), set.loiter().h_plus(), set.loiter().h_minus()];
        let mut blob = Vec::with_capacity(layers.iter().map(|l| l.values().len() * 8).sum());
        for layer in layers {
            for v in layer.values() {
                blob.extend_from_slice(&v.to_le_bytes());
            }
        }
        let tmp = bin_path.with_extension("bin.tmp");
        fs::write(&tmp, &blob)?;
        fs::rename(&tmp, bin_path)?;
        fs::write(json_path, serde_json::to_vec_pretty(header)?)?;
        Ok(())
    }
}
