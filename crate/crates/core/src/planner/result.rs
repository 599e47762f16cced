use serde::{Deserialize, Serialize};

use super::problem::ResolvedConfig;
use crate::dubins::{AirplanePath, PathSegment};
use crate::safe_sets::LoiterCircle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    /// A solution was found and the search ended on its own terms
    /// (first-solution stop or iteration budget).
    Solved,
    /// A solution was found but the wall-clock budget (or a cancel) cut
    /// the anytime refinement short.
    SolvedSuboptimalBudget,
    InfeasibleGoal,
    Timeout,
}

impl PlanStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, Self::Solved | Self::SolvedSuboptimalBudget)
    }
}

/// One-period safety certificate of the goal circle the path ends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalCertificate {
    pub goal_circle: LoiterCircle,
    pub n_check: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Seconds since the search started, when wall time is recorded.
    pub t: Option<f64>,
    pub iteration: u64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub iterations: u64,
    pub nodes: usize,
    pub time_to_first_solution: Option<f64>,
    pub iterations_to_first_solution: Option<u64>,
    pub elapsed_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub cost: Option<f64>,
    pub path: Option<AirplanePath>,
    pub start_circle: LoiterCircle,
    pub certificate: Option<GoalCertificate>,
    pub trace: Vec<TracePoint>,
    pub stats: PlanStats,
    pub config: Option<ResolvedConfig>,
    pub reason: Option<String>,
}

/// Wire form of a [`PlanResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub status: PlanStatus,
    pub cost: Option<f64>,
    pub time_to_first_solution: Option<f64>,
    pub path: Vec<PathSegment>,
    pub certificate: Option<GoalCertificate>,
    pub trace: Vec<TracePoint>,
    pub start_circle: LoiterCircle,
    pub stats: PlanStats,
    pub config: Option<ResolvedConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

impl PlanResult {
    pub fn report(&self) -> PlanReport {
        PlanReport {
            status: self.status,
            cost: self.cost,
            time_to_first_solution: self.stats.time_to_first_solution,
            path: self.path.as_ref().map(|p| p.segments().to_vec()).unwrap_or_default(),
            certificate: self.certificate,
            trace: self.trace.clone(),
            start_circle: self.start_circle,
            stats: self.stats.clone(),
            config: self.config.clone(),
            reason: self.reason.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report()).expect("plan report serializes")
    }

    /// Direction the path arrives in on the goal circle.
    pub fn arrival_circle(&self) -> Option<LoiterCircle> {
        self.certificate.map(|c| c.goal_circle)
    }
}

/// Incumbent improvement published while the search runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEvent {
    pub t: Option<f64>,
    pub iteration: u64,
    pub cost: f64,
    pub goal_circle: LoiterCircle,
    pub path: Vec<PathSegment>,
}
