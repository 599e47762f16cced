//! Python module `terrain_planner`.
//!
//! Thin wrappers: every class holds a core value and every function
//! forwards to the core crate. Poses are `(x, y, z, theta)` tuples and
//! loiter directions are the strings `"cw"` and `"ccw"`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use terrain_planner::dubins::{
    airplane_path, dubins_shortest_2d, AirplanePath, AirplaneState, PlanarPose, VehicleLimits,
};
use terrain_planner::guidance;
use terrain_planner::planner::{self, PlannerConfig, PlanningProblem};
use terrain_planner::safe_sets::{circle_states_safe, LoiterCircle, LoiterDirection};
use terrain_planner::scenarios;
use terrain_planner::terrain::{self, Corridor, DiskPadding, ElevationGrid, GridFrame, LoiterOptions, SurfaceSet};

/// `(start_state, kappa, gamma, length)` for one path segment.
type SegmentTuple = ((f64, f64, f64, f64), f64, f64, f64);
/// `(point, tangent, curvature, arc_length)` of a tracking reference.
type ReferenceTuple = ([f64; 3], [f64; 3], f64, f64);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn direction(text: &str) -> PyResult<LoiterDirection> {
    match text {
        "cw" => Ok(LoiterDirection::Cw),
        "ccw" => Ok(LoiterDirection::Ccw),
        other => Err(PyValueError::new_err(format!("direction must be 'cw' or 'ccw', got {other:?}"))),
    }
}

fn direction_name(d: LoiterDirection) -> &'static str {
    match d {
        LoiterDirection::Cw => "cw",
        LoiterDirection::Ccw => "ccw",
    }
}

fn state(t: (f64, f64, f64, f64)) -> AirplaneState {
    AirplaneState::new(t.0, t.1, t.2, t.3)
}

fn tuple(s: AirplaneState) -> (f64, f64, f64, f64) {
    (s.x, s.y, s.z, s.theta)
}

fn limits(radius: f64, gamma_max_deg: f64) -> PyResult<VehicleLimits> {
    VehicleLimits::new(radius, gamma_max_deg.to_radians()).map_err(value_err)
}

/// Elevation grid with cell `(col, row)` centered at `origin + (col, row) * cell_size`.
#[pyclass(name = "ElevationGrid", module = "terrain_planner", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyElevationGrid {
    inner: ElevationGrid,
}

#[pymethods]
impl PyElevationGrid {
    #[new]
    #[pyo3(signature = (heights, n_cols, n_rows, cell_size, origin = (0.0, 0.0)))]
    fn new(heights: Vec<f64>, n_cols: usize, n_rows: usize, cell_size: f64, origin: (f64, f64)) -> PyResult<Self> {
        let frame = GridFrame::new([origin.0, origin.1], cell_size, n_cols, n_rows).map_err(value_err)?;
        Ok(Self { inner: ElevationGrid::new(frame, heights).map_err(value_err)? })
    }

    /// Parses ESRI ASCII grid text.
    #[staticmethod]
    fn from_esri_ascii(text: &str) -> PyResult<Self> {
        Ok(Self { inner: terrain::load_dem_str(text).map_err(value_err)? })
    }

    /// Terrain of a built-in benchmark map (`"easy"` or `"hard"`).
    #[staticmethod]
    fn scenario(name: &str) -> PyResult<Self> {
        let sc = scenarios::by_name(name).ok_or_else(|| value_err(format!("unknown scenario {name:?}")))?;
        Ok(Self { inner: sc.terrain.generate().map_err(value_err)? })
    }

    fn to_esri_ascii(&self) -> String {
        terrain::to_esri_ascii(&self.inner)
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.frame().n_cols
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.frame().n_rows
    }

    #[getter]
    fn cell_size(&self) -> f64 {
        self.inner.frame().cell_size
    }

    #[getter]
    fn origin(&self) -> (f64, f64) {
        let [x, y] = self.inner.frame().origin;
        (x, y)
    }

    /// Row-major heights, row 0 in the south; nodata is NaN.
    fn heights(&self) -> Vec<f64> {
        self.inner.heights().to_vec()
    }

    fn height_at(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.interpolate(x, y)
    }

    fn __repr__(&self) -> String {
        let f = self.inner.frame();
        format!("ElevationGrid({}x{}, cell_size={})", f.n_cols, f.n_rows, f.cell_size)
    }
}

/// Corridor surfaces and the valid loiter mask of one grid.
#[pyclass(name = "SurfaceSet", module = "terrain_planner", frozen)]
pub struct PySurfaceSet {
    inner: Arc<SurfaceSet>,
}

#[pymethods]
impl PySurfaceSet {
    #[new]
    #[pyo3(signature = (grid, min_dist = 50.0, max_dist = 120.0, radius = scenarios::LOITER_RADIUS, padding_m = None))]
    fn new(
        py: Python<'_>,
        grid: &PyElevationGrid,
        min_dist: f64,
        max_dist: f64,
        radius: f64,
        padding_m: Option<f64>,
    ) -> PyResult<Self> {
        let corridor = Corridor::new(min_dist, max_dist).map_err(value_err)?;
        let mut options = LoiterOptions::new(radius);
        if let Some(m) = padding_m {
            options.padding = DiskPadding::Meters(m);
        }
        let grid = grid.inner.clone();
        let set = py.detach(move || SurfaceSet::build(grid, corridor, &options)).map_err(value_err)?;
        Ok(Self { inner: Arc::new(set) })
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.loiter().radius()
    }

    #[getter]
    fn valid_fraction(&self) -> f64 {
        self.inner.mask().valid_fraction()
    }

    /// Lower corridor bound at `(x, y)`, bilinear.
    fn d_minus(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.d_minus().interpolate(x, y)
    }

    /// Upper corridor bound at `(x, y)`, bilinear.
    fn d_plus(&self, x: f64, y: f64) -> Option<f64> {
        self.inner.d_plus().interpolate(x, y)
    }

    fn is_valid_loiter(&self, x: f64, y: f64) -> bool {
        self.inner.mask().is_valid_at(x, y)
    }

    fn goal_altitude(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.loiter().goal_altitude([x, y]).map_err(value_err)
    }

    /// Row-major valid flags, row 0 in the south.
    fn mask(&self) -> Vec<bool> {
        self.inner.mask().cells().to_vec()
    }

    /// Loiter circle centered on the cell nearest to `(x, y)` at the loiter altitude.
    #[pyo3(signature = (x, y, direction = "ccw"))]
    fn loiter_at(&self, x: f64, y: f64, direction: &str) -> PyResult<PyLoiterCircle> {
        let dir = self::direction(direction)?;
        let c = planner::loiter_at(&self.inner, [x, y], self.radius(), dir).map_err(value_err)?;
        Ok(PyLoiterCircle { inner: c })
    }

    /// Whether every state of `circle` sampled at `n` azimuths is strictly inside the corridor.
    #[pyo3(signature = (circle, n = 3600))]
    fn circle_safe(&self, circle: &PyLoiterCircle, n: usize) -> bool {
        circle_states_safe(&circle.inner, self.inner.d_plus(), self.inner.d_minus(), n).is_safe()
    }

    #[pyo3(signature = (path, ds = 2.5))]
    fn path_collision_free(&self, path: &PyAirplanePath, ds: f64) -> bool {
        planner::path_collision_free(&path.inner, self.inner.d_plus(), self.inner.d_minus(), ds)
    }
}

#[pyclass(name = "LoiterCircle", module = "terrain_planner", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyLoiterCircle {
    inner: LoiterCircle,
}

#[pymethods]
impl PyLoiterCircle {
    #[new]
    #[pyo3(signature = (center, radius, direction = "ccw"))]
    fn new(center: (f64, f64, f64), radius: f64, direction: &str) -> PyResult<Self> {
        Ok(Self { inner: LoiterCircle::new([center.0, center.1, center.2], radius, self::direction(direction)?) })
    }

    #[getter]
    fn center(&self) -> (f64, f64, f64) {
        let [x, y, z] = self.inner.center;
        (x, y, z)
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius
    }

    #[getter]
    fn direction(&self) -> &'static str {
        direction_name(self.inner.direction)
    }

    /// Arc length of one lap.
    fn period(&self) -> f64 {
        self.inner.period()
    }

    /// Tangent state at azimuth `phi`.
    fn state_at(&self, phi: f64) -> (f64, f64, f64, f64) {
        tuple(self.inner.state_at(phi))
    }

    fn __repr__(&self) -> String {
        let [x, y, z] = self.inner.center;
        format!("LoiterCircle(({x}, {y}, {z}), {}, {:?})", self.inner.radius, self.direction())
    }
}

/// Sequence of constant-curvature, constant-climb segments.
#[pyclass(name = "AirplanePath", module = "terrain_planner", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyAirplanePath {
    inner: AirplanePath,
}

#[pymethods]
impl PyAirplanePath {
    #[getter]
    fn length(&self) -> f64 {
        self.inner.length()
    }

    fn __len__(&self) -> usize {
        self.inner.segments().len()
    }

    /// Segments as `(start_state, kappa, gamma, length)`.
    fn segments(&self) -> Vec<SegmentTuple> {
        self.inner.segments().iter().map(|s| (tuple(s.start), s.kappa, s.gamma, s.length)).collect()
    }

    fn sample(&self, s: f64) -> PyResult<(f64, f64, f64, f64)> {
        self.inner.sample(s).map(tuple).map_err(value_err)
    }

    fn sample_uniform(&self, ds: f64) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        if !(ds > 0.0) {
            return Err(value_err("ds must be positive"));
        }
        Ok(self.inner.sample_uniform(ds).into_iter().map(tuple).collect())
    }

    /// Arc position of the point closest to `query`.
    fn closest_point(&self, query: (f64, f64, f64)) -> Option<f64> {
        guidance::closest_point(&self.inner, [query.0, query.1, query.2])
    }

    /// Tracking reference `(p, tangent, kappa, s)` for a query position.
    #[pyo3(signature = (query, l_bar = 10.0, terminal_kappa = 0.0))]
    fn reference(
        &self,
        query: (f64, f64, f64),
        l_bar: f64,
        terminal_kappa: f64,
    ) -> PyResult<Option<ReferenceTuple>> {
        if !(l_bar > 0.0) {
            return Err(value_err("l_bar must be positive"));
        }
        let Some(s) = guidance::closest_point(&self.inner, [query.0, query.1, query.2]) else {
            return Ok(None);
        };
        Ok(guidance::reference_at(&self.inner, s, l_bar, terminal_kappa).map(|r| (r.p, r.tangent, r.kappa, r.s)))
    }

    /// States every `speed * dt` meters, optionally looping `goal` for `loiter_s` seconds.
    #[pyo3(signature = (speed, dt, goal = None, loiter_s = 0.0))]
    fn replay(
        &self,
        speed: f64,
        dt: f64,
        goal: Option<&PyLoiterCircle>,
        loiter_s: f64,
    ) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        if !(speed > 0.0 && dt > 0.0) {
            return Err(value_err("speed and dt must be positive"));
        }
        let goal = goal.map(|g| (&g.inner, loiter_s));
        Ok(guidance::replay(&self.inner, speed, dt, goal).into_iter().map(tuple).collect())
    }

    fn __repr__(&self) -> String {
        format!("AirplanePath({} segments, length={:.3})", self.inner.segments().len(), self.inner.length())
    }
}

#[pyclass(name = "PlanResult", module = "terrain_planner", frozen)]
pub struct PyPlanResult {
    inner: planner::PlanResult,
}

#[pymethods]
impl PyPlanResult {
    /// `"solved"`, `"solved_suboptimal_budget"`, `"infeasible_goal"` or `"timeout"`.
    #[getter]
    fn status(&self) -> String {
        serde_json::to_value(self.inner.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }

    #[getter]
    fn solved(&self) -> bool {
        self.inner.status.is_solved()
    }

    #[getter]
    fn cost(&self) -> Option<f64> {
        self.inner.cost
    }

    #[getter]
    fn reason(&self) -> Option<String> {
        self.inner.reason.clone()
    }

    #[getter]
    fn path(&self) -> Option<PyAirplanePath> {
        self.inner.path.clone().map(|inner| PyAirplanePath { inner })
    }

    #[getter]
    fn goal_circle(&self) -> Option<PyLoiterCircle> {
        self.inner.arrival_circle().map(|inner| PyLoiterCircle { inner })
    }

    #[getter]
    fn time_to_first_solution(&self) -> Option<f64> {
        self.inner.stats.time_to_first_solution
    }

    #[getter]
    fn iterations(&self) -> u64 {
        self.inner.stats.iterations
    }

    /// Incumbent costs as `(seconds or None, iteration, cost)`.
    fn trace(&self) -> Vec<(Option<f64>, u64, f64)> {
        self.inner.trace.iter().map(|t| (t.t, t.iteration, t.cost)).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

/// Shortest planar Dubins length between `(x, y, theta)` poses.
#[pyfunction]
fn dubins_length(q0: (f64, f64, f64), q1: (f64, f64, f64), radius: f64) -> PyResult<f64> {
    if !(radius > 0.0) {
        return Err(value_err("radius must be positive"));
    }
    let a = PlanarPose::new(q0.0, q0.1, q0.2);
    let b = PlanarPose::new(q1.0, q1.1, q1.2);
    Ok(dubins_shortest_2d(a, b, radius).length())
}

/// Dubins airplane path between `(x, y, z, theta)` states.
#[pyfunction]
#[pyo3(signature = (start, goal, radius, gamma_max_deg = scenarios::GAMMA_MAX_DEG))]
fn dubins_airplane(
    start: (f64, f64, f64, f64),
    goal: (f64, f64, f64, f64),
    radius: f64,
    gamma_max_deg: f64,
) -> PyResult<PyAirplanePath> {
    let limits = limits(radius, gamma_max_deg)?;
    Ok(PyAirplanePath { inner: airplane_path(&state(start), &state(goal), &limits) })
}

/// Plans from a loiter at `start` to a loiter at `goal` (both `(x, y)`).
#[pyfunction]
#[pyo3(signature = (
    surfaces, start, goal, start_direction = "ccw", gamma_max_deg = scenarios::GAMMA_MAX_DEG,
    seed = 0, budget_s = None, iterations = None, first_solution = false, deterministic = false,
))]
#[allow(clippy::too_many_arguments)]
fn plan(
    py: Python<'_>,
    surfaces: &PySurfaceSet,
    start: (f64, f64),
    goal: (f64, f64),
    start_direction: &str,
    gamma_max_deg: f64,
    seed: u64,
    budget_s: Option<f64>,
    iterations: Option<u64>,
    first_solution: bool,
    deterministic: bool,
) -> PyResult<PyPlanResult> {
    let limits = limits(surfaces.radius(), gamma_max_deg)?;
    let problem = PlanningProblem::from_centers(
        surfaces.inner.clone(),
        [start.0, start.1],
        direction(start_direction)?,
        [goal.0, goal.1],
        limits,
    )
    .map_err(value_err)?;
    let config = PlannerConfig {
        seed,
        max_time_s: match (budget_s, iterations) {
            (None, Some(_)) => None,
            (b, _) => Some(b.unwrap_or(10.0)),
        },
        max_iterations: iterations,
        stop_at_first_solution: first_solution,
        record_wall_time: !deterministic,
        ..Default::default()
    };
    let inner = py.detach(move || planner::plan(&problem, &config));
    Ok(PyPlanResult { inner })
}

#[pymodule]
#[pyo3(name = "terrain_planner")]
fn terrain_planner_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class and function to `m`; also used to embed the module.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyElevationGrid>()?;
    m.add_class::<PySurfaceSet>()?;
    m.add_class::<PyLoiterCircle>()?;
    m.add_class::<PyAirplanePath>()?;
    m.add_class::<PyPlanResult>()?;
    m.add_function(wrap_pyfunction!(dubins_length, m)?)?;
    m.add_function(wrap_pyfunction!(dubins_airplane, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add("SCENARIOS", scenarios::NAMES.to_vec())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
