//! Dubins airplane paths: planar Dubins curves lifted to 3D under a
//! flight-path-angle limit, with whole helix turns for large climbs.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::planar::{dubins_shortest_2d, normalize_angle, PlanarPose, Turn};
use crate::error::PathError;

const HELIX_ROUNDING: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirplaneState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta: f64,
}

impl AirplaneState {
    /// Builds a state with the heading wrapped into `[0, 2π)`.
    pub fn new(x: f64, y: f64, z: f64, theta: f64) -> Self {
        Self { x, y, z, theta: normalize_angle(theta) }
    }

    pub fn planar(&self) -> PlanarPose {
        PlanarPose::new(self.x, self.y, self.theta)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn distance(&self, other: &AirplaneState) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        let dz = other.z - self.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.theta.is_finite()
    }
}

/// Turn radius and flight-path-angle limits of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleLimits {
    pub radius: f64,
    pub gamma_max: f64,
    pub gamma_min: f64,
}

impl VehicleLimits {
    /// Symmetric climb/descent limits.
    pub fn new(radius: f64, gamma_max: f64) -> Result<Self, PathError> {
        Self::with_gamma_min(radius, gamma_max, -gamma_max)
    }

    pub fn with_gamma_min(radius: f64, gamma_max: f64, gamma_min: f64) -> Result<Self, PathError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PathError::Parameter(format!("turn radius must be positive, got {radius}")));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(gamma_max > 0.0 && gamma_max < half_pi) {
            return Err(PathError::Parameter(format!("gamma_max must lie in (0, pi/2), got {gamma_max}")));
        }
        if !(gamma_min < 0.0 && gamma_min > -half_pi) {
            return Err(PathError::Parameter(format!("gamma_min must lie in (-pi/2, 0), got {gamma_min}")));
        }
        Ok(Self { radius, gamma_max, gamma_min })
    }

    pub fn max_curvature(&self) -> f64 {
        1.0 / self.radius
    }
}

/// One arc, helix or line with constant curvature and flight-path angle.
///
/// `kappa` is the horizontal curvature; `length` is measured along the 3D path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub start: AirplaneState,
    pub kappa: f64,
    pub gamma: f64,
    pub length: f64,
}

impl PathSegment {
    /// Closed-form state after `s` meters along the segment.
    pub fn sample(&self, s: f64) -> AirplaneState {
        let (sg, cg) = self.gamma.sin_cos();
        let h = s * cg;
        let st = self.start;
        let z = st.z + s * sg;
        if self.kappa == 0.0 {
            let (sin_t, cos_t) = st.theta.sin_cos();
            AirplaneState::new(st.x + h * cos_t, st.y + h * sin_t, z, st.theta)
        } else {
            let theta = st.theta + self.kappa * h;
            let x = st.x + (theta.sin() - st.theta.sin()) / self.kappa;
            let y = st.y + (st.theta.cos() - theta.cos()) / self.kappa;
            AirplaneState::new(x, y, z, theta)
        }
    }

    pub fn end(&self) -> AirplaneState {
        self.sample(self.length)
    }

    pub fn horizontal_length(&self) -> f64 {
        self.length * self.gamma.cos()
    }

    /// Kinematic field `d/ds (x, y, z, θ)` along this segment.
    pub fn derivative(&self, s: f64) -> [f64; 4] {
        let theta = self.sample(s).theta;
        let (sg, cg) = self.gamma.sin_cos();
        [cg * theta.cos(), cg * theta.sin(), sg, self.kappa * cg]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Altitude change reachable along the planar curve.
    Low,
    /// Whole helix turns appended to reach the altitude.
    HighHelix,
    /// Start equals goal.
    Degenerate,
    /// Concatenation of several planned edges.
    Composite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPath {
    segments: Vec<PathSegment>,
    total_length: f64,
    case_tag: CaseTag,
}

/// Continuous sequence of segments parameterized by 3D arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RawPath", from = "RawPath")]
pub struct AirplanePath {
    segments: Vec<PathSegment>,
    /// Arc length at the start of each segment.
    offsets: Vec<f64>,
    total_length: f64,
    case_tag: CaseTag,
}

impl From<RawPath> for AirplanePath {
    fn from(raw: RawPath) -> Self {
        Self::from_segments(raw.segments, raw.case_tag)
    }
}

impl From<AirplanePath> for RawPath {
    fn from(p: AirplanePath) -> Self {
        RawPath { segments: p.segments, total_length: p.total_length, case_tag: p.case_tag }
    }
}

impl AirplanePath {
    pub fn from_segments(segments: Vec<PathSegment>, case_tag: CaseTag) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for seg in &segments {
            offsets.push(acc);
            acc += seg.length;
        }
        Self { segments, offsets, total_length: acc, case_tag }
    }

    pub fn empty() -> Self {
        Self::from_segments(Vec::new(), CaseTag::Degenerate)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.segments
    }

    pub fn length(&self) -> f64 {
        self.total_length
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn start(&self) -> Option<AirplaneState> {
        self.segments.first().map(|s| s.start)
    }

    pub fn end(&self) -> Option<AirplaneState> {
        self.segments.last().map(|s| s.end())
    }

    /// Arc length at which segment `i` starts.
    pub fn segment_offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    /// Index of the segment containing arc length `s` (the later segment
    /// at a shared boundary, the last segment at `s = S`).
    pub fn segment_index(&self, s: f64) -> usize {
        let i = self.offsets.partition_point(|&o| o <= s);
        i.saturating_sub(1).min(self.segments.len().saturating_sub(1))
    }

    fn check_range(&self, s: f64) -> Result<(), PathError> {
        if !(0.0..=self.total_length).contains(&s) {
            return Err(PathError::OutOfRange { s, length: self.total_length });
        }
        Ok(())
    }

    /// State at arc length `s`.
    pub fn sample(&self, s: f64) -> Result<AirplaneState, PathError> {
        self.check_range(s)?;
        if self.segments.is_empty() {
            return Err(PathError::OutOfRange { s, length: 0.0 });
        }
        let i = self.segment_index(s);
        let local = (s - self.offsets[i]).clamp(0.0, self.segments[i].length);
        Ok(self.segments[i].sample(local))
    }

    /// `(κ, γ)` in effect at arc length `s`.
    pub fn curvature_and_gamma(&self, s: f64) -> Result<(f64, f64), PathError> {
        self.check_range(s)?;
        let seg = self.segments.get(self.segment_index(s)).ok_or(PathError::OutOfRange { s, length: 0.0 })?;
        Ok((seg.kappa, seg.gamma))
    }

    /// States at arc-length steps no larger than `ds`, endpoints included.
    pub fn sample_uniform(&self, ds: f64) -> Vec<AirplaneState> {
        if self.segments.is_empty() {
            return Vec::new();
        }
        let n = ((self.total_length / ds).ceil() as usize).max(1);
        (0..=n)
            .map(|k| {
                let s = if k == n { self.total_length } else { self.total_length * k as f64 / n as f64 };
                self.sample(s).expect("s within range")
            })
            .collect()
    }

    /// Prefix of the path of length `min(len, S)`.
    pub fn truncated(&self, len: f64) -> AirplanePath {
        if len >= self.total_length {
            return self.clone();
        }
        let mut segments = Vec::new();
        for (seg, &off) in self.segments.iter().zip(&self.offsets) {
            if off >= len {
                break;
            }
            let mut seg = *seg;
            seg.length = seg.length.min(len - off);
            segments.push(seg);
        }
        AirplanePath::from_segments(segments, self.case_tag)
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn concat(paths: impl IntoIterator<Item = AirplanePath>) -> AirplanePath {
        let segments: Vec<PathSegment> = paths.into_iter().flat_map(|p| p.segments).collect();
        let tag = if segments.is_empty() { CaseTag::Degenerate } else { CaseTag::Composite };
        AirplanePath::from_segments(segments, tag)
    }
}

/// Builds segments for a lifted planar curve with constant `gamma`.
fn lift(start: AirplaneState, pieces: &[(Turn, f64)], radius: f64, gamma: f64) -> Vec<PathSegment> {
    let cg = gamma.cos();
    let mut state = start;
    let mut out = Vec::with_capacity(pieces.len());
    for &(turn, horizontal) in pieces {
        if horizontal <= 0.0 {
            continue;
        }
        let seg = PathSegment { start: state, kappa: turn.sign() / radius, gamma, length: horizontal / cg };
        state = seg.end();
        out.push(seg);
    }
    out
}

/// Dubins airplane path from `x0` to `x1`.
///
/// When the planar curve is too short to absorb the altitude change at the
/// flight-path-angle limit, whole `2πR` turns are added to the first arc
/// and the climb angle is flattened to match.
pub fn airplane_path(x0: &AirplaneState, x1: &AirplaneState, limits: &VehicleLimits) -> AirplanePath {
    let radius = limits.radius;
    let planar = dubins_shortest_2d(x0.planar(), x1.planar(), radius);
    let l2d = planar.length();
    let dz = x1.z - x0.z;
    if l2d == 0.0 && dz == 0.0 {
        return AirplanePath::empty();
    }
    let tan_limit = if dz >= 0.0 { limits.gamma_max.tan() } else { (-limits.gamma_min).tan() };
    let lengths = planar.segment_lengths();
    let mut pieces: Vec<(Turn, f64)> = planar.word.turns().into_iter().zip(lengths).collect();

    if dz.abs() <= l2d * tan_limit {
        let gamma = dz.atan2(l2d);
        return AirplanePath::from_segments(lift(*x0, &pieces, radius, gamma), CaseTag::Low);
    }

    let needed = dz.abs() / tan_limit - l2d;
    let turns = ((needed / (TAU * radius)) - HELIX_ROUNDING).ceil().max(1.0);
    let helix = TAU * radius * turns;
    if l2d == 0.0 {
        pieces = vec![(Turn::Left, helix)];
    } else {
        // every Dubins word starts with an arc (possibly of zero length)
        pieces[0].1 += helix;
    }
    let gamma = dz.atan2(l2d + helix);
    AirplanePath::from_segments(lift(*x0, &pieces, radius, gamma), CaseTag::HighHelix)
}

/// Quasi-distance: length of [`airplane_path`].
pub fn airplane_distance(x0: &AirplaneState, x1: &AirplaneState, limits: &VehicleLimits) -> f64 {
    let radius = limits.radius;
    let l2d = dubins_shortest_2d(x0.planar(), x1.planar(), radius).length();
    let dz = x1.z - x0.z;
    let tan_limit = if dz >= 0.0 { limits.gamma_max.tan() } else { (-limits.gamma_min).tan() };
    if dz.abs() <= l2d * tan_limit {
        return l2d.hypot(dz);
    }
    let needed = dz.abs() / tan_limit - l2d;
    let turns = ((needed / (TAU * radius)) - HELIX_ROUNDING).ceil().max(1.0);
    (l2d + TAU * radius * turns).hypot(dz)
}
