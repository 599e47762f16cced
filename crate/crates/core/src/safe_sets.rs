//! Loiter circles as safe periodic paths.
//!
//! A level circle whose whole period stays strictly inside the corridor
//! can be flown forever, so none of its states is an inevitable collision
//! state. Start and goal sets of the planner are tangent states sampled
//! on such circles.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::dubins::{AirplanePath, AirplaneState, CaseTag, PathSegment};
use crate::error::TerrainError;
use crate::terrain::{LoiterSurfaces, OffsetSurface};

/// Default number of tangent states per circle direction.
pub const DEFAULT_STATES_PER_DIRECTION: usize = 8;
/// Default azimuth samples for the per-state period check.
pub const DEFAULT_CHECK_SAMPLES: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoiterDirection {
    Cw,
    Ccw,
}

impl LoiterDirection {
    /// +1 for counter-clockwise (left turns), -1 for clockwise.
    pub fn sign(self) -> f64 {
        match self {
            Self::Ccw => 1.0,
            Self::Cw => -1.0,
        }
    }

    pub fn from_curvature(kappa: f64) -> Option<Self> {
        if kappa > 0.0 {
            Some(Self::Ccw)
        } else if kappa < 0.0 {
            Some(Self::Cw)
        } else {
            None
        }
    }
}

impl std::str::FromStr for LoiterDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cw" => Ok(Self::Cw),
            "ccw" => Ok(Self::Ccw),
            other => Err(format!("unknown loiter direction `{other}` (expected cw or ccw)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoiterCircle {
    pub center: [f64; 3],
    pub radius: f64,
    pub direction: LoiterDirection,
}

impl LoiterCircle {
    pub fn new(center: [f64; 3], radius: f64, direction: LoiterDirection) -> Self {
        assert!(radius > 0.0, "loiter radius must be positive");
        Self { center, radius, direction }
    }

    /// Arc length of one revolution.
    pub fn period(&self) -> f64 {
        TAU * self.radius
    }

    pub fn curvature(&self) -> f64 {
        self.direction.sign() / self.radius
    }

    /// Tangent state at polar angle `phi` around the center.
    pub fn state_at(&self, phi: f64) -> AirplaneState {
        let [cx, cy, cz] = self.center;
        let heading = phi + self.direction.sign() * FRAC_PI_2;
        AirplaneState::new(cx + self.radius * phi.cos(), cy + self.radius * phi.sin(), cz, heading)
    }

    /// Polar angle of a position around the center.
    pub fn azimuth_of(&self, x: f64, y: f64) -> f64 {
        (y - self.center[1]).atan2(x - self.center[0])
    }

    /// `laps` revolutions starting at `from`, which should lie on the circle.
    pub fn orbit(&self, from: AirplaneState, laps: f64) -> AirplanePath {
        let seg = PathSegment { start: from, kappa: self.curvature(), gamma: 0.0, length: self.period() * laps };
        AirplanePath::from_segments(vec![seg], CaseTag::Low)
    }

    pub fn same_center(&self, other: &LoiterCircle) -> bool {
        self.center == other.center && self.radius == other.radius
    }
}

/// Tangent states discretizing one loiter circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalSet {
    pub circle: LoiterCircle,
    pub states: Vec<AirplaneState>,
}

impl TerminalSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// `n` tangent states at polar angles `2πi/n` in the circle's direction.
pub fn discretize_circle(circle: &LoiterCircle, n: usize) -> TerminalSet {
    assert!(n >= 4, "at least 4 states per circle");
    let states = (0..n).map(|i| circle.state_at(TAU * i as f64 / n as f64)).collect();
    TerminalSet { circle: *circle, states }
}

/// Goal states for a circle flown in either direction: the union of the
/// clockwise and counter-clockwise sets.
pub fn discretize_both_directions(center: [f64; 3], radius: f64, n: usize) -> Vec<(LoiterCircle, AirplaneState)> {
    [LoiterDirection::Ccw, LoiterDirection::Cw]
        .into_iter()
        .flat_map(|dir| {
            let circle = LoiterCircle::new(center, radius, dir);
            discretize_circle(&circle, n).states.into_iter().map(move |s| (circle, s))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum CircleVerdict {
    Safe,
    /// A sampled state left the corridor.
    Collision { azimuth: f64 },
    /// A sampled state lies outside the map (or over nodata).
    OutOfMap { azimuth: f64 },
}

impl CircleVerdict {
    pub fn is_safe(self) -> bool {
        matches!(self, Self::Safe)
    }
}

/// Samples one full period at `n_check` azimuths and requires
/// `D⁻ < c_z < D⁺` at every sample.
pub fn circle_states_safe(
    circle: &LoiterCircle,
    d_plus: &OffsetSurface,
    d_minus: &OffsetSurface,
    n_check: usize,
) -> CircleVerdict {
    let n = n_check.max(8);
    let [cx, cy, cz] = circle.center;
    for k in 0..n {
        let phi = TAU * k as f64 / n as f64;
        let x = cx + circle.radius * phi.cos();
        let y = cy + circle.radius * phi.sin();
        let (Some(hi), Some(lo)) = (d_plus.interpolate(x, y), d_minus.interpolate(x, y)) else {
            return CircleVerdict::OutOfMap { azimuth: phi };
        };
        if !(lo < cz && cz < hi) {
            return CircleVerdict::Collision { azimuth: phi };
        }
    }
    CircleVerdict::Safe
}

/// Constant-time sufficient check against the horizontal offset surfaces
/// at the cell nearest to the center. `true` implies the per-state check
/// passes when the surfaces carry the default interpolation padding.
pub fn circle_safe_fast(circle: &LoiterCircle, loiter: &LoiterSurfaces) -> Result<bool, TerrainError> {
    if (circle.radius - loiter.radius()).abs() > 1e-9 {
        return Err(TerrainError::RadiusMismatch { expected: loiter.radius(), found: circle.radius });
    }
    let [cx, cy, cz] = circle.center;
    let frame = loiter.mask().frame();
    let r = circle.radius;
    if !(frame.contains(cx - r, cy - r) && frame.contains(cx + r, cy + r)) {
        return Ok(false);
    }
    let Some((col, row)) = frame.nearest_cell(cx, cy) else {
        return Ok(false);
    };
    if !loiter.mask().is_valid(col, row) {
        return Ok(false);
    }
    match (loiter.h_plus().value(col, row), loiter.h_minus().value(col, row)) {
        (Some(hi), Some(lo)) => Ok(lo < cz && cz < hi),
        _ => Ok(false),
    }
}
