//! ESRI ASCII grid reader and writer.
//!
//! Header keys are matched case-insensitively. `xllcorner`/`yllcorner`
//! refer to the lower-left corner of the lower-left cell; the body lists
//! one row per line, northernmost row first.

use std::fmt::Write as _;
use std::io::BufRead;

use super::grid::{ElevationGrid, GridFrame};
use crate::error::TerrainError;

const REQUIRED: [&str; 5] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize"];

#[derive(Default)]
struct Header {
    ncols: Option<usize>,
    nrows: Option<usize>,
    xll: Option<f64>,
    yll: Option<f64>,
    cellsize: Option<f64>,
    nodata: Option<f64>,
}

fn header_err(key: &str, line: usize, reason: impl Into<String>) -> TerrainError {
    TerrainError::Header { key: key.to_string(), line, reason: reason.into() }
}

fn parse_num<T: std::str::FromStr>(key: &str, line: usize, value: Option<&str>) -> Result<T, TerrainError> {
    let value = value.ok_or_else(|| header_err(key, line, "missing value"))?;
    value
        .parse()
        .map_err(|_| header_err(key, line, format!("cannot parse `{value}`")))
}

/// Reads an ESRI ASCII grid.
pub fn load_dem<R: BufRead>(reader: R) -> Result<ElevationGrid, TerrainError> {
    let mut header = Header::default();
    let mut lines = reader.lines().enumerate().peekable();
    let mut body_start = None;

    for (idx, line) in lines.by_ref() {
        let line_no = idx + 1;
        let line = line.map_err(|e| TerrainError::Parameter(format!("read error: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().unwrap_or_default();
        if key.parse::<f64>().is_ok() {
            body_start = Some((line_no, line));
            break;
        }
        let value = parts.next();
        if parts.next().is_some() {
            return Err(header_err(key, line_no, "trailing tokens after value"));
        }
        match key.to_ascii_lowercase().as_str() {
            "ncols" => header.ncols = Some(parse_num(key, line_no, value)?),
            "nrows" => header.nrows = Some(parse_num(key, line_no, value)?),
            "xllcorner" => header.xll = Some(parse_num(key, line_no, value)?),
            "yllcorner" => header.yll = Some(parse_num(key, line_no, value)?),
            "cellsize" => header.cellsize = Some(parse_num(key, line_no, value)?),
            "nodata_value" => header.nodata = Some(parse_num(key, line_no, value)?),
            _ => return Err(header_err(key, line_no, "unknown header key")),
        }
    }

    let first_body_line = body_start.as_ref().map_or(1, |(n, _)| *n);
    let missing = |key: &str| header_err(key, first_body_line, "required key missing");
    let ncols = header.ncols.ok_or_else(|| missing(REQUIRED[0]))?;
    let nrows = header.nrows.ok_or_else(|| missing(REQUIRED[1]))?;
    let xll = header.xll.ok_or_else(|| missing(REQUIRED[2]))?;
    let yll = header.yll.ok_or_else(|| missing(REQUIRED[3]))?;
    let cellsize = header.cellsize.ok_or_else(|| missing(REQUIRED[4]))?;
    if !(cellsize > 0.0) {
        return Err(header_err("cellsize", first_body_line, "must be positive"));
    }
    let half = cellsize / 2.0;
    let frame = GridFrame::new([xll + half, yll + half], cellsize, ncols, nrows)?;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nrows);
    let body = body_start
        .into_iter()
        .map(Ok)
        .chain(lines.map(|(idx, l)| l.map(|l| (idx + 1, l))));
    for item in body {
        let (line_no, line) = item.map_err(|e| TerrainError::Parameter(format!("read error: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| TerrainError::Value { line: line_no, token: tok.to_string() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != ncols {
            return Err(TerrainError::RowLength { line: line_no, found: row.len(), expected: ncols });
        }
        if rows.len() == nrows {
            return Err(TerrainError::RowCount { found: nrows + 1, expected: nrows });
        }
        rows.push(row);
    }
    if rows.len() != nrows {
        return Err(TerrainError::RowCount { found: rows.len(), expected: nrows });
    }

    let mut heights = vec![0.0; ncols * nrows];
    for (file_row, values) in rows.into_iter().enumerate() {
        let row = nrows - 1 - file_row;
        for (col, v) in values.into_iter().enumerate() {
            let is_nodata = header.nodata.is_some_and(|nd| v == nd) || !v.is_finite();
            heights[frame.index(col, row)] = if is_nodata { f64::NAN } else { v };
        }
    }
    Ok(ElevationGrid::new(frame, heights)?.with_nodata_value(header.nodata))
}

pub fn load_dem_str(text: &str) -> Result<ElevationGrid, TerrainError> {
    load_dem(text.as_bytes())
}

/// Serializes a grid back to ESRI ASCII. Nodata is written with the grid's
/// sentinel, or -9999 when it has none.
pub fn to_esri_ascii(grid: &ElevationGrid) -> String {
    let f = grid.frame();
    let nodata = grid.nodata_value().unwrap_or(-9999.0);
    let half = f.cell_size / 2.0;
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", f.n_cols);
    let _ = writeln!(out, "nrows {}", f.n_rows);
    let _ = writeln!(out, "xllcorner {}", f.origin[0] - half);
    let _ = writeln!(out, "yllcorner {}", f.origin[1] - half);
    let _ = writeln!(out, "cellsize {}", f.cell_size);
    let _ = writeln!(out, "NODATA_value {nodata}");
    for row in (0..f.n_rows).rev() {
        let line: Vec<String> = (0..f.n_cols)
            .map(|col| grid.height(col, row).unwrap_or(nodata).to_string())
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_two_by_two() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\nNODATA_value -9999\n0 0\n0 0\n";
        let g = load_dem_str(text).unwrap();
        assert!(g.heights().iter().all(|&h| h == 0.0));
        assert_eq!(g.frame().cell_size, 10.0);
        assert_eq!(g.frame().origin, [5.0, 5.0]);
    }

    #[test]
    fn north_row_first_and_nodata() {
        let text = "NCOLS 3\nNROWS 2\nXLLCORNER 100\nYLLCORNER 200\nCELLSIZE 2\nNODATA_VALUE -1\n1 2 3\n4 -1 6\n";
        let g = load_dem_str(text).unwrap();
        assert_eq!(g.height(0, 1), Some(1.0));
        assert_eq!(g.height(2, 0), Some(6.0));
        assert!(g.is_nodata(1, 0));
        assert_eq!(g.frame().world(0, 0), [101.0, 201.0]);
    }

    #[test]
    fn wrong_row_length_is_dimension_error() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\n0 0 0\n0 0\n";
        assert_eq!(
            load_dem_str(text).unwrap_err(),
            TerrainError::RowLength { line: 6, found: 3, expected: 2 }
        );
    }

    #[test]
    fn wrong_row_count_is_dimension_error() {
        let text = "ncols 2\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 10\n0 0\n0 0\n";
        assert!(matches!(load_dem_str(text), Err(TerrainError::RowCount { found: 2, expected: 3 })));
    }

    #[test]
    fn header_errors_name_the_key() {
        let missing = "ncols 2\nnrows 2\nxllcorner 0\ncellsize 10\n0 0\n0 0\n";
        match load_dem_str(missing).unwrap_err() {
            TerrainError::Header { key, .. } => assert_eq!(key, "yllcorner"),
            e => panic!("unexpected {e:?}"),
        }
        let bad = "ncols two\nnrows 2\n";
        match load_dem_str(bad).unwrap_err() {
            TerrainError::Header { key, line, .. } => {
                assert_eq!(key, "ncols");
                assert_eq!(line, 1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn writer_roundtrips() {
        let text = "ncols 3\nnrows 2\nxllcorner 100\nyllcorner 200\ncellsize 2\nNODATA_value -1\n1 2.5 3\n4 -1 6\n";
        let g = load_dem_str(text).unwrap();
        let again = load_dem_str(&to_esri_ascii(&g)).unwrap();
        assert_eq!(g.frame(), again.frame());
        for (a, b) in g.heights().iter().zip(again.heights()) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }
}
