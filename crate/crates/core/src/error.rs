use thiserror::Error;

/// Errors raised while reading or deriving terrain layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerrainError {
    #[error("line {line}: malformed header key `{key}`: {reason}")]
    Header {
        key: String,
        line: usize,
        reason: String,
    },
    #[error("line {line}: grid body has {found} values in a row, expected {expected}")]
    RowLength {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("grid body has {found} rows, expected {expected}")]
    RowCount { found: usize, expected: usize },
    #[error("line {line}: cannot parse height value `{token}`")]
    Value { line: usize, token: String },
    #[error("invalid grid parameter: {0}")]
    Parameter(String),
    #[error("surface frames differ")]
    FrameMismatch,
    #[error("loiter radius mismatch: {expected} m vs {found} m")]
    RadiusMismatch { expected: f64, found: f64 },
    #[error("surface kind {found} cannot be used as {expected}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("position ({x:.1}, {y:.1}) lies outside the map extent")]
    OutOfExtent { x: f64, y: f64 },
    #[error("position ({x:.1}, {y:.1}) is not a valid loiter position")]
    InvalidLoiterPosition { x: f64, y: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("arc length {s} outside path range [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("invalid vehicle parameter: {0}")]
    Parameter(String),
}
