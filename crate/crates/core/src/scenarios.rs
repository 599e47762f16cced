//! Benchmark maps used by the acceptance suite and the `benchmark` command.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dubins::VehicleLimits;
use crate::error::TerrainError;
use crate::planner::PlanningProblem;
use crate::safe_sets::LoiterDirection;
use crate::terrain::{Corridor, LoiterOptions, SurfaceSet, SyntheticTerrain, TerrainShape};

pub const LOITER_RADIUS: f64 = 66.67;
pub const GAMMA_MAX_DEG: f64 = 8.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub terrain: SyntheticTerrain,
    pub corridor: Corridor,
    pub radius: f64,
    pub gamma_max_deg: f64,
    pub start: [f64; 2],
    pub start_direction: LoiterDirection,
    pub goal: [f64; 2],
}

impl Scenario {
    pub fn limits(&self) -> VehicleLimits {
        VehicleLimits::new(self.radius, self.gamma_max_deg.to_radians()).expect("scenario limits are valid")
    }

    pub fn surfaces(&self) -> Result<SurfaceSet, TerrainError> {
        SurfaceSet::build(self.terrain.generate()?, self.corridor, &LoiterOptions::new(self.radius))
    }

    pub fn problem(&self, surfaces: Arc<SurfaceSet>) -> Result<PlanningProblem, TerrainError> {
        PlanningProblem::from_centers(surfaces, self.start, self.start_direction, self.goal, self.limits())
    }
}

/// Open terrain crossed by a single smooth ridge 100 m high.
pub fn easy() -> Scenario {
    let shape = TerrainShape::Valley {
        depth: 0.0,
        ridge: 100.0,
        saddle: 100.0,
        floor_half_width: 0.0,
        wall_width: 1.0,
        ridge_half_width: 800.0,
        saddle_half_width: 1.0,
    };
    Scenario {
        name: "easy".into(),
        terrain: SyntheticTerrain::new([5000.0, 3000.0], 20.0, shape),
        corridor: Corridor::default(),
        radius: LOITER_RADIUS,
        gamma_max_deg: GAMMA_MAX_DEG,
        start: [700.0, 1500.0],
        start_direction: LoiterDirection::Ccw,
        goal: [4300.0, 1500.0],
    }
}

/// Two basins in a walled valley, joined only by a narrow saddle.
pub fn hard() -> Scenario {
    let shape = TerrainShape::Valley {
        depth: 300.0,
        ridge: 250.0,
        saddle: 120.0,
        floor_half_width: 600.0,
        wall_width: 300.0,
        ridge_half_width: 1000.0,
        saddle_half_width: 200.0,
    };
    Scenario {
        name: "hard".into(),
        terrain: SyntheticTerrain::new([6000.0, 3000.0], 20.0, shape),
        corridor: Corridor::default(),
        radius: LOITER_RADIUS,
        gamma_max_deg: GAMMA_MAX_DEG,
        start: [800.0, 1500.0],
        start_direction: LoiterDirection::Ccw,
        goal: [5200.0, 1500.0],
    }
}

pub fn by_name(name: &str) -> Option<Scenario> {
    match name {
        "easy" => Some(easy()),
        "hard" => Some(hard()),
        _ => None,
    }
}

pub const NAMES: [&str; 2] = ["easy", "hard"];
