//! Anytime RRT* between safe loiter circles.

mod collision;
mod problem;
mod result;
mod rrt;

pub use collision::{path_collision_free, CorridorChecker};
pub use problem::{loiter_at, GoalSpec, PlannerConfig, PlanningProblem, ResolvedConfig};
pub use result::{GoalCertificate, PlanEvent, PlanReport, PlanResult, PlanStats, PlanStatus, TracePoint};
pub use rrt::{plan, plan_with};
