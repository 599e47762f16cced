use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dubins::VehicleLimits;
use crate::safe_sets::{
    circle_safe_fast, circle_states_safe, CircleVerdict, LoiterCircle, LoiterDirection, DEFAULT_CHECK_SAMPLES,
    DEFAULT_STATES_PER_DIRECTION,
};
use crate::error::TerrainError;
use crate::terrain::SurfaceSet;

/// Goal request: a full circle, or a 2D center whose altitude comes from
/// the loiter surfaces and whose direction is left free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalSpec {
    Circle(LoiterCircle),
    Center([f64; 2]),
}

#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub surfaces: Arc<SurfaceSet>,
    pub start: LoiterCircle,
    pub goal: GoalSpec,
    pub limits: VehicleLimits,
}

/// Goal after validation: the circle geometry and whether the direction is
/// fixed (explicit circle) or free (center request).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ResolvedGoal {
    pub circle: LoiterCircle,
    pub free_direction: bool,
}

impl PlanningProblem {
    /// Start loiter at `start_xy` flown in `direction`, goal at `goal_xy`.
    /// Both centers snap to the nearest cell and take the loiter altitude.
    pub fn from_centers(
        surfaces: Arc<SurfaceSet>,
        start_xy: [f64; 2],
        direction: LoiterDirection,
        goal_xy: [f64; 2],
        limits: VehicleLimits,
    ) -> Result<Self, TerrainError> {
        let start = loiter_at(&surfaces, start_xy, limits.radius, direction)?;
        Ok(Self { surfaces, start, goal: GoalSpec::Center(goal_xy), limits })
    }

    pub(crate) fn resolve_goal(&self) -> Result<ResolvedGoal, String> {
        match self.goal {
            GoalSpec::Circle(circle) => {
                if (circle.radius - self.limits.radius).abs() > 1e-9 {
                    return Err(format!(
                        "goal radius {} differs from the loiter radius {}",
                        circle.radius, self.limits.radius
                    ));
                }
                Ok(ResolvedGoal { circle, free_direction: false })
            }
            GoalSpec::Center(xy) => {
                let circle = loiter_at(&self.surfaces, xy, self.limits.radius, LoiterDirection::Ccw)
                    .map_err(|e| e.to_string())?;
                Ok(ResolvedGoal { circle, free_direction: true })
            }
        }
    }

    /// Checks the start circle and goal. Returns the goal certificate on success.
    pub(crate) fn validate(&self) -> Result<ResolvedGoal, String> {
        if (self.start.radius - self.limits.radius).abs() > 1e-9 {
            return Err(format!(
                "start radius {} differs from the loiter radius {}",
                self.start.radius, self.limits.radius
            ));
        }
        let set = &self.surfaces;
        match circle_states_safe(&self.start, set.d_plus(), set.d_minus(), DEFAULT_CHECK_SAMPLES) {
            CircleVerdict::Safe => {}
            v => return Err(format!("start circle is not a safe periodic path: {v:?}")),
        }
        let goal = self.resolve_goal()?;
        let fast = circle_safe_fast(&goal.circle, set.loiter()).unwrap_or(false);
        let states = circle_states_safe(&goal.circle, set.d_plus(), set.d_minus(), DEFAULT_CHECK_SAMPLES);
        if !(fast || states.is_safe()) {
            return Err(format!("goal circle is not a safe periodic path: {states:?}"));
        }
        Ok(goal)
    }
}

/// Circle centered on the cell nearest to `xy` at the loiter altitude.
pub fn loiter_at(
    surfaces: &SurfaceSet,
    xy: [f64; 2],
    radius: f64,
    direction: LoiterDirection,
) -> Result<LoiterCircle, TerrainError> {
    let loiter = surfaces.loiter();
    if (loiter.radius() - radius).abs() > 1e-9 {
        return Err(TerrainError::RadiusMismatch { expected: loiter.radius(), found: radius });
    }
    let [x, y] = loiter.snap(xy)?;
    let z = loiter.goal_altitude([x, y])?;
    Ok(LoiterCircle::new([x, y, z], radius, direction))
}

/// Tuning knobs; `None` fields take map-dependent defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Collision-check step, meters.
    pub ds: Option<f64>,
    pub max_edge_length: f64,
    pub goal_bias: f64,
    pub rewire_gamma: Option<f64>,
    pub states_per_direction: usize,
    pub seed: u64,
    pub max_time_s: Option<f64>,
    pub max_iterations: Option<u64>,
    pub stop_at_first_solution: bool,
    /// Record wall-clock timestamps in results. Disable for byte-stable output.
    pub record_wall_time: bool,
    pub certificate_samples: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            ds: None,
            max_edge_length: 600.0,
            goal_bias: 0.05,
            rewire_gamma: None,
            states_per_direction: DEFAULT_STATES_PER_DIRECTION,
            seed: 0,
            max_time_s: Some(10.0),
            max_iterations: None,
            stop_at_first_solution: false,
            record_wall_time: true,
            certificate_samples: DEFAULT_CHECK_SAMPLES,
        }
    }
}

/// Configuration with every default materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub ds: f64,
    pub max_edge_length: f64,
    pub goal_bias: f64,
    pub rewire_gamma: f64,
    pub states_per_direction: usize,
    pub seed: u64,
    pub max_time_s: Option<f64>,
    pub max_iterations: Option<u64>,
    pub stop_at_first_solution: bool,
    pub record_wall_time: bool,
    pub certificate_samples: usize,
}

impl PlannerConfig {
    pub fn resolve(&self, surfaces: &SurfaceSet, limits: &VehicleLimits) -> ResolvedConfig {
        let frame = surfaces.frame();
        let ds = self.ds.unwrap_or_else(|| (frame.cell_size / 2.0).max(2.5));
        if self.max_edge_length < std::f64::consts::TAU * limits.radius {
            log::warn!(
                "max edge length {} m is shorter than one loiter period {} m",
                self.max_edge_length,
                std::f64::consts::TAU * limits.radius
            );
        }
        ResolvedConfig {
            ds,
            max_edge_length: self.max_edge_length,
            goal_bias: self.goal_bias.clamp(0.0, 1.0),
            rewire_gamma: self.rewire_gamma.unwrap_or(2.0 * frame.diagonal()),
            states_per_direction: self.states_per_direction.max(4),
            seed: self.seed,
            max_time_s: self.max_time_s,
            max_iterations: self.max_iterations,
            stop_at_first_solution: self.stop_at_first_solution,
            record_wall_time: self.record_wall_time,
            certificate_samples: self.certificate_samples.max(8),
        }
    }
}
