//! Multi-root RRT* in Dubins airplane space.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::collision::CorridorChecker;
use super::problem::{PlanningProblem, ResolvedConfig};
use super::result::{GoalCertificate, PlanEvent, PlanResult, PlanStats, PlanStatus, TracePoint};
use crate::dubins::{airplane_distance, airplane_path, AirplanePath, AirplaneState, VehicleLimits};
use crate::safe_sets::{circle_states_safe, discretize_both_directions, discretize_circle, LoiterCircle};
use crate::terrain::SurfaceSet;

const ALTITUDE_TRIES: usize = 20;
const IMPROVEMENT_EPS: f64 = 1e-9;

struct Node {
    state: AirplaneState,
    parent: Option<usize>,
    cost: f64,
    edge: Option<AirplanePath>,
    children: Vec<usize>,
}

struct Search<'a> {
    surfaces: &'a SurfaceSet,
    limits: VehicleLimits,
    cfg: &'a ResolvedConfig,
    checker: CorridorChecker<'a>,
    goals: Vec<(LoiterCircle, AirplaneState)>,
    goal_nodes: Vec<Option<usize>>,
    nodes: Vec<Node>,
}

impl<'a> Search<'a> {
    fn distance(&self, from: &AirplaneState, to: &AirplaneState) -> f64 {
        airplane_distance(from, to, &self.limits)
    }

    fn edge_free(&self, path: &AirplanePath) -> bool {
        self.checker.path_free(path)
    }

    /// Node minimizing `d_D(node → target)`. The Euclidean distance is a
    /// lower bound of `d_D` and prunes exact evaluations.
    fn nearest(&self, target: &AirplaneState) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, node) in self.nodes.iter().enumerate() {
            if node.state.distance(target) >= best.1 {
                continue;
            }
            let d = self.distance(&node.state, target);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    fn near(&self, target: &AirplaneState, radius: f64) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.state.distance(target) <= radius)
            .map(|(i, _)| i)
            .collect()
    }

    fn rewire_radius(&self) -> f64 {
        let n = self.nodes.len().max(2) as f64;
        (self.cfg.rewire_gamma * (n.ln() / n).powf(0.25)).min(self.cfg.max_edge_length)
    }

    fn push(&mut self, state: AirplaneState, parent: usize, edge: AirplanePath) -> usize {
        let cost = self.nodes[parent].cost + edge.length();
        let idx = self.nodes.len();
        self.nodes.push(Node { state, parent: Some(parent), cost, edge: Some(edge), children: Vec::new() });
        self.nodes[parent].children.push(idx);
        idx
    }

    fn reparent(&mut self, child: usize, parent: usize, edge: AirplanePath) {
        if let Some(old) = self.nodes[child].parent {
            self.nodes[old].children.retain(|&c| c != child);
        }
        let new_cost = self.nodes[parent].cost + edge.length();
        let delta = new_cost - self.nodes[child].cost;
        self.nodes[child].parent = Some(parent);
        self.nodes[child].edge = Some(edge);
        self.nodes[parent].children.push(child);
        let mut stack = vec![child];
        while let Some(i) = stack.pop() {
            self.nodes[i].cost += delta;
            stack.extend(self.nodes[i].children.iter().copied());
        }
    }

    /// Exact (untruncated) connection from `from` to goal state `k`.
    fn connect_goal(&mut self, from: usize, k: usize) {
        let target = self.goals[k].1;
        let path = airplane_path(&self.nodes[from].state, &target, &self.limits);
        if path.is_empty() {
            return;
        }
        let cost = self.nodes[from].cost + path.length();
        if let Some(g) = self.goal_nodes[k] {
            if cost >= self.nodes[g].cost - IMPROVEMENT_EPS || g == from {
                return;
            }
        }
        if !self.edge_free(&path) {
            return;
        }
        match self.goal_nodes[k] {
            Some(g) => self.reparent(g, from, path),
            None => {
                let idx = self.push(target, from, path);
                self.goal_nodes[k] = Some(idx);
            }
        }
    }

    fn sample_state(&self, rng: &mut ChaCha8Rng) -> Option<AirplaneState> {
        let [x0, y0, x1, y1] = self.surfaces.frame().bounds();
        for _ in 0..ALTITUDE_TRIES {
            let x = rng.gen_range(x0..=x1);
            let y = rng.gen_range(y0..=y1);
            if let Some((lo, hi)) = self.surfaces.bounds_at(x, y) {
                if hi > lo {
                    let z = lo + (hi - lo) * rng.gen::<f64>();
                    if z > lo && z < hi {
                        let theta = rng.gen_range(0.0..TAU);
                        return Some(AirplaneState::new(x, y, z, theta));
                    }
                }
            }
        }
        None
    }

    /// One free-space extension: steer, choose parent, rewire.
    fn extend(&mut self, sample: &AirplaneState) -> Option<usize> {
        let (nearest, _) = self.nearest(sample);
        let steer = airplane_path(&self.nodes[nearest].state, sample, &self.limits)
            .truncated(self.cfg.max_edge_length);
        if steer.is_empty() || !self.edge_free(&steer) {
            return None;
        }
        let x_new = steer.end().expect("non-empty path");
        let radius = self.rewire_radius();
        let near = self.near(&x_new, radius);

        let mut candidates: Vec<(f64, usize, Option<f64>)> =
            vec![(self.nodes[nearest].cost + steer.length(), nearest, None)];
        for &i in &near {
            if i == nearest {
                continue;
            }
            let d = self.distance(&self.nodes[i].state, &x_new);
            if d <= radius && d > 0.0 {
                candidates.push((self.nodes[i].cost + d, i, Some(d)));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut steer = Some(steer);
        let mut chosen = None;
        for (_, i, d) in candidates {
            let edge = match d {
                None => steer.take().expect("nearest considered once"),
                Some(_) => {
                    let p = airplane_path(&self.nodes[i].state, &x_new, &self.limits);
                    if !self.edge_free(&p) {
                        continue;
                    }
                    p
                }
            };
            chosen = Some((i, edge));
            break;
        }
        let (parent, edge) = chosen?;
        let new = self.push(x_new, parent, edge);

        let new_cost = self.nodes[new].cost;
        for &i in &near {
            if i == parent || self.nodes[i].parent.is_none() {
                continue;
            }
            if self.nodes[i].state.distance(&x_new) + new_cost >= self.nodes[i].cost - IMPROVEMENT_EPS {
                continue;
            }
            let d = self.distance(&x_new, &self.nodes[i].state);
            if new_cost + d >= self.nodes[i].cost - IMPROVEMENT_EPS {
                continue;
            }
            let p = airplane_path(&x_new, &self.nodes[i].state, &self.limits);
            if self.edge_free(&p) {
                self.reparent(i, new, p);
            }
        }
        Some(new)
    }

    fn best_goal(&self) -> Option<(usize, usize)> {
        self.goal_nodes
            .iter()
            .enumerate()
            .filter_map(|(k, g)| g.map(|g| (k, g)))
            .min_by(|a, b| self.nodes[a.1].cost.total_cmp(&self.nodes[b.1].cost).then(a.0.cmp(&b.0)))
    }

    fn extract(&self, mut idx: usize) -> AirplanePath {
        let mut edges = Vec::new();
        while let Some(parent) = self.nodes[idx].parent {
            edges.push(self.nodes[idx].edge.clone().expect("non-root has an edge"));
            idx = parent;
        }
        edges.reverse();
        AirplanePath::concat(edges)
    }
}

/// Runs the planner to its budget.
pub fn plan(problem: &PlanningProblem, config: &super::PlannerConfig) -> PlanResult {
    plan_with(problem, config, |_| {}, None)
}

/// Runs the planner, reporting every improved solution to `on_improve`.
/// Setting `cancel` stops the search at the next iteration.
pub fn plan_with(
    problem: &PlanningProblem,
    config: &super::PlannerConfig,
    mut on_improve: impl FnMut(&PlanEvent),
    cancel: Option<&AtomicBool>,
) -> PlanResult {
    let surfaces = problem.surfaces.as_ref();
    let mut cfg = config.resolve(surfaces, &problem.limits);
    if cfg.max_time_s.is_none() && cfg.max_iterations.is_none() {
        cfg.max_time_s = Some(10.0);
    }
    let mut result = PlanResult {
        status: PlanStatus::InfeasibleGoal,
        cost: None,
        path: None,
        start_circle: problem.start,
        certificate: None,
        trace: Vec::new(),
        stats: PlanStats::default(),
        config: Some(cfg.clone()),
        reason: None,
    };

    let goal = match problem.validate() {
        Ok(goal) => goal,
        Err(reason) => {
            result.reason = Some(reason);
            return result;
        }
    };
    let certify = |circle: &LoiterCircle| {
        circle_states_safe(circle, surfaces.d_plus(), surfaces.d_minus(), cfg.certificate_samples).is_safe()
    };

    if problem.start.same_center(&goal.circle) {
        let circle = if goal.free_direction { problem.start } else { goal.circle };
        if !certify(&circle) {
            result.reason = Some("goal circle fails the period check".into());
            return result;
        }
        result.status = PlanStatus::Solved;
        result.cost = Some(0.0);
        result.path = Some(AirplanePath::empty());
        result.certificate = Some(GoalCertificate { goal_circle: circle, n_check: cfg.certificate_samples });
        return result;
    }
    if !certify(&goal.circle) {
        result.reason = Some("goal circle fails the period check".into());
        return result;
    }

    let n = cfg.states_per_direction;
    let goals = if goal.free_direction {
        let [x, y, z] = goal.circle.center;
        discretize_both_directions([x, y, z], goal.circle.radius, n)
    } else {
        discretize_circle(&goal.circle, n).states.into_iter().map(|s| (goal.circle, s)).collect()
    };
    let roots = discretize_circle(&problem.start, n).states;

    let mut search = Search {
        surfaces,
        limits: problem.limits,
        cfg: &cfg,
        checker: CorridorChecker::new(surfaces.d_plus(), surfaces.d_minus(), cfg.ds, &problem.limits),
        goal_nodes: vec![None; goals.len()],
        goals,
        nodes: roots
            .into_iter()
            .map(|state| Node { state, parent: None, cost: 0.0, edge: None, children: Vec::new() })
            .collect(),
    };
    for root in 0..search.nodes.len() {
        for k in 0..search.goals.len() {
            if search.nodes[root].state.distance(&search.goals[k].1) <= cfg.max_edge_length {
                search.connect_goal(root, k);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let started = Instant::now();
    let elapsed = || started.elapsed().as_secs_f64();
    let mut incumbent: Option<f64> = None;
    let mut iteration: u64 = 0;
    let mut cut_short = false;

    loop {
        if let Some(best) = search.best_goal() {
            let cost = search.nodes[best.1].cost;
            if incumbent.is_none_or(|c| cost < c - IMPROVEMENT_EPS) {
                let t = cfg.record_wall_time.then(elapsed);
                if incumbent.is_none() {
                    result.stats.time_to_first_solution = t;
                    result.stats.iterations_to_first_solution = Some(iteration);
                }
                incumbent = Some(cost);
                result.trace.push(TracePoint { t, iteration, cost });
                on_improve(&PlanEvent {
                    t,
                    iteration,
                    cost,
                    goal_circle: search.goals[best.0].0,
                    path: search.extract(best.1).segments().to_vec(),
                });
            }
        }
        if cfg.stop_at_first_solution && incumbent.is_some() {
            break;
        }
        if cfg.max_iterations.is_some_and(|m| iteration >= m) {
            break;
        }
        if cfg.max_time_s.is_some_and(|m| elapsed() >= m) || cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            cut_short = true;
            break;
        }
        iteration += 1;

        if rng.gen::<f64>() < cfg.goal_bias {
            let k = rng.gen_range(0..search.goals.len());
            let (nearest, _) = search.nearest(&search.goals[k].1);
            search.connect_goal(nearest, k);
            continue;
        }
        let Some(sample) = search.sample_state(&mut rng) else {
            continue;
        };
        if let Some(new) = search.extend(&sample) {
            for k in 0..search.goals.len() {
                if search.nodes[new].state.distance(&search.goals[k].1) <= cfg.max_edge_length {
                    search.connect_goal(new, k);
                }
            }
        }
    }

    result.stats.iterations = iteration;
    result.stats.nodes = search.nodes.len();
    result.stats.elapsed_s = cfg.record_wall_time.then(elapsed);
    match search.best_goal() {
        Some((k, g)) => {
            result.status = if cut_short { PlanStatus::SolvedSuboptimalBudget } else { PlanStatus::Solved };
            result.cost = Some(search.nodes[g].cost);
            result.path = Some(search.extract(g));
            result.certificate =
                Some(GoalCertificate { goal_circle: search.goals[k].0, n_check: cfg.certificate_samples });
        }
        None => {
            result.status = PlanStatus::Timeout;
            result.reason = Some("budget exhausted before a solution was found".into());
        }
    }
    result
}
