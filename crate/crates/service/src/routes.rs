use std::convert::Infallible;
use std::panic::AssertUnwindSafe;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;

use terrain_planner::dubins::{AirplanePath, CaseTag, VehicleLimits};
use terrain_planner::guidance::{reference_stream, ReferenceSample};
use terrain_planner::planner::{
    loiter_at, plan_with, GoalSpec, PlanResult, PlanStats, PlanStatus, PlannerConfig, PlanningProblem,
};
use terrain_planner::safe_sets::{LoiterCircle, LoiterDirection};
use terrain_planner::scenarios;
use terrain_planner::terrain::{
    load_dem_str, mask_raster, surface_raster, Corridor, DiskPadding, LoiterOptions, Raster, SurfaceSet,
    ValidLoiterMask,
};
use terrain_planner::TerrainError;

use crate::error::{ApiError, ApiResult};
use crate::state::{AppState, CommittedLeg, Job, JobMessage, Session};

type AppRef = Arc<AppState>;

pub fn router(state: AppRef) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/terrain", get(get_terrain))
        .route("/sessions/{id}/mask", get(get_mask))
        .route("/sessions/{id}/surfaces/{layer}", get(get_surface))
        .route("/sessions/{id}/plan", post(post_plan))
        .route("/sessions/{id}/commit", post(post_commit))
        .route("/sessions/{id}/replay", get(get_replay))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/events", get(job_events))
        .route("/jobs/{id}/cancel", post(cancel_job))
        .route("/jobs/{id}/profile", get(job_profile))
        .with_state(state)
}

fn session_or_404(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state.session(id).ok_or_else(|| ApiError::not_found("session", id))
}

fn job_or_404(state: &AppState, id: &str) -> ApiResult<Arc<Job>> {
    state.job(id).ok_or_else(|| ApiError::not_found("job", id))
}

fn raster_json(raster: &Raster) -> Value {
    json!({ "pgm_base64": BASE64.encode(&raster.pgm), "sidecar": raster.sidecar })
}

/// 422 body for a center the mask rejects, with the nearest valid cell.
fn invalid_position(mask: &ValidLoiterMask, xy: [f64; 2]) -> ApiError {
    let nearest = mask.nearest_valid(xy[0], xy[1]).map(|(c, r, distance)| {
        let [x, y] = mask.frame().world(c, r);
        json!({ "nearest_valid": [x, y], "offset": [x - xy[0], y - xy[1]], "distance": distance })
    });
    let mut details = json!({ "position": xy });
    if let Some(Value::Object(extra)) = nearest {
        details.as_object_mut().expect("object").extend(extra);
    } else {
        details["nearest_valid"] = Value::Null;
    }
    ApiError::new(
        StatusCode::UNPROCESSABLE_ENTITY,
        "invalid_loiter_position",
        format!("({:.1}, {:.1}) is not a valid loiter position", xy[0], xy[1]),
    )
    .with(details)
}

/// Same verdict as the planner: nearest cell of the planning mask.
fn check_center(mask: &ValidLoiterMask, xy: [f64; 2]) -> ApiResult<()> {
    match mask.frame().nearest_cell(xy[0], xy[1]) {
        None => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "out_of_extent",
            format!("({:.1}, {:.1}) lies outside the map", xy[0], xy[1]),
        )
        .with(json!({ "position": xy }))),
        Some((c, r)) if mask.is_valid(c, r) => Ok(()),
        Some(_) => Err(invalid_position(mask, xy)),
    }
}

fn circle_at(surfaces: &SurfaceSet, xy: [f64; 2], radius: f64, dir: LoiterDirection) -> ApiResult<LoiterCircle> {
    check_center(surfaces.mask(), xy)?;
    loiter_at(surfaces, xy, radius, dir).map_err(|e| match e {
        TerrainError::InvalidLoiterPosition { .. } | TerrainError::OutOfExtent { .. } => {
            invalid_position(surfaces.mask(), xy)
        }
        other => ApiError::internal(other.to_string()),
    })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRequest {
    /// ESRI ASCII grid text.
    pub dem: Option<String>,
    pub scenario: Option<String>,
    pub min_dist: Option<f64>,
    pub max_dist: Option<f64>,
    pub radius: Option<f64>,
    /// Extra disk radius in meters; default is the interpolation padding.
    pub padding_m: Option<f64>,
    pub gamma_max_deg: Option<f64>,
    pub start: Option<[f64; 2]>,
    pub start_dir: Option<LoiterDirection>,
}

async fn create_session(State(state): State<AppRef>, Json(req): Json<SessionRequest>) -> ApiResult<Response> {
    let scenario = match (&req.dem, &req.scenario) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("give either `dem` or `scenario`, not both")),
        (None, None) => return Err(ApiError::bad_request("one of `dem` or `scenario` is required")),
        (None, Some(name)) => Some(scenarios::by_name(name).ok_or_else(|| {
            ApiError::bad_request(format!("unknown scenario `{name}` (known: {})", scenarios::NAMES.join(", ")))
        })?),
        (Some(_), None) => None,
    };
    let radius = req.radius.unwrap_or(scenarios::LOITER_RADIUS);
    let gamma = req.gamma_max_deg.unwrap_or(scenarios::GAMMA_MAX_DEG);
    let limits = VehicleLimits::new(radius, gamma.to_radians()).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let corridor = Corridor::new(req.min_dist.unwrap_or(50.0), req.max_dist.unwrap_or(120.0))
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mut options = LoiterOptions::new(radius);
    if let Some(m) = req.padding_m {
        if !(m >= 0.0) {
            return Err(ApiError::bad_request("padding_m must be non-negative"));
        }
        options.padding = DiskPadding::Meters(m);
    }
    let start = req
        .start
        .or(scenario.as_ref().map(|s| s.start))
        .ok_or_else(|| ApiError::bad_request("`start` is required with a DEM"))?;
    let dir = req.start_dir.or(scenario.as_ref().map(|s| s.start_direction)).unwrap_or(LoiterDirection::Ccw);
    let dem = req.dem;
    let surfaces = tokio::task::spawn_blocking(move || -> ApiResult<SurfaceSet> {
        let grid = match (dem, scenario) {
            (Some(text), _) => load_dem_str(&text).map_err(|e| ApiError::bad_request(format!("dem: {e}")))?,
            (None, Some(sc)) => sc.terrain.generate().map_err(|e| ApiError::internal(e.to_string()))?,
            (None, None) => unreachable!("source was checked"),
        };
        SurfaceSet::build(grid, corridor, &options).map_err(|e| ApiError::bad_request(e.to_string()))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    let start_circle = circle_at(&surfaces, start, radius, dir)?;
    let mask = surfaces.mask();
    let mut body = json!({
        "frame": surfaces.frame(),
        "corridor": surfaces.corridor(),
        "radius": radius,
        "valid_fraction": mask.valid_fraction(),
        "start_circle": start_circle,
    });
    let session = Arc::new(Session::new(Arc::new(surfaces), limits, start_circle));
    body["session_id"] = json!(session.id);
    state.insert_session(session);
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

#[derive(Debug, Serialize)]
struct LegView {
    job_id: String,
    length: f64,
    start: LoiterCircle,
    goal: LoiterCircle,
}

async fn get_session(State(state): State<AppRef>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = session_or_404(&state, &id)?;
    let inner = session.lock();
    let legs: Vec<LegView> = inner
        .legs
        .iter()
        .map(|l| LegView { job_id: l.job_id.clone(), length: l.path.length(), start: l.start, goal: l.goal })
        .collect();
    let replay = inner.legs.last().map(|leg| {
        let elapsed = leg.committed_at.elapsed().as_secs_f64();
        let s = elapsed * state.config.replay_speed;
        json!({
            "leg": inner.legs.len() - 1,
            "elapsed_s": elapsed,
            "s": s.min(leg.path.length()),
            "loitering": s >= leg.path.length(),
        })
    });
    Ok(Json(json!({
        "session_id": session.id,
        "frame": session.surfaces.frame(),
        "corridor": session.surfaces.corridor(),
        "radius": session.limits.radius,
        "gamma_max_deg": session.limits.gamma_max.to_degrees(),
        "start_circle": inner.start,
        "active_job": inner.active_job,
        "jobs": inner.jobs,
        "legs": legs,
        "replay": replay,
    })))
}

#[derive(Debug, Deserialize)]
struct TerrainQuery {
    max_cells: Option<usize>,
}

async fn get_terrain(
    State(state): State<AppRef>,
    Path(id): Path<String>,
    Query(q): Query<TerrainQuery>,
) -> ApiResult<Json<Value>> {
    let session = session_or_404(&state, &id)?;
    let grid = session.surfaces.terrain();
    let frame = grid.frame();
    let max_cells = q.max_cells.unwrap_or(65_536).max(1);
    let stride = ((frame.len() as f64 / max_cells as f64).sqrt().ceil() as usize).max(1);
    let cols = frame.n_cols.div_ceil(stride);
    let rows = frame.n_rows.div_ceil(stride);
    let mut heights = Vec::with_capacity(cols * rows);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in (0..frame.n_rows).step_by(stride) {
        for c in (0..frame.n_cols).step_by(stride) {
            let h = grid.height(c, r);
            if let Some(v) = h {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            heights.push(h);
        }
    }
    Ok(Json(json!({
        "frame": frame,
        "stride": stride,
        "cols": cols,
        "rows": rows,
        "min": lo.is_finite().then_some(lo),
        "max": hi.is_finite().then_some(hi),
        "heights": heights,
    })))
}

#[derive(Debug, Deserialize)]
struct MaskQuery {
    radius: Option<f64>,
}

async fn get_mask(
    State(state): State<AppRef>,
    Path(id): Path<String>,
    Query(q): Query<MaskQuery>,
) -> ApiResult<Json<Value>> {
    let session = session_or_404(&state, &id)?;
    let own = session.surfaces.loiter();
    let radius = q.radius.unwrap_or(own.radius());
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(ApiError::bad_request("radius must be positive"));
    }
    let extra;
    let loiter = if (radius - own.radius()).abs() < 1e-9 {
        own
    } else {
        let s = session.clone();
        extra = tokio::task::spawn_blocking(move || s.extra_loiter(radius))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))?
            .map_err(ApiError::bad_request)?;
        extra.as_ref()
    };
    let mask = loiter.mask();
    let raster = mask_raster(mask, loiter.radius(), None);
    let mut body = raster_json(&raster);
    let obj = body.as_object_mut().expect("object");
    obj.insert("radius".into(), json!(loiter.radius()));
    obj.insert("disk_radius".into(), json!(loiter.radius() + loiter.padding()));
    obj.insert("valid_count".into(), json!(mask.valid_count()));
    obj.insert("cells".into(), json!(mask.cells().len()));
    obj.insert("valid_fraction".into(), json!(mask.valid_fraction()));
    obj.insert("plannable".into(), json!((radius - own.radius()).abs() < 1e-9));
    Ok(Json(body))
}

async fn get_surface(
    State(state): State<AppRef>,
    Path((id, layer)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let session = session_or_404(&state, &id)?;
    let set = &session.surfaces;
    let surface = match layer.as_str() {
        "d_minus" => set.d_minus(),
        "d_plus" => set.d_plus(),
        "h_plus" => set.loiter().h_plus(),
        "h_minus" => set.loiter().h_minus(),
        other => return Err(ApiError::not_found("surface layer", other)),
    };
    Ok(Json(raster_json(&surface_raster(surface))))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanRequest {
    pub goal: [f64; 2],
    pub seed: Option<u64>,
    pub budget_s: Option<f64>,
    pub iterations: Option<u64>,
    pub stop_at_first_solution: Option<bool>,
    pub ds: Option<f64>,
}

fn crashed(start: LoiterCircle) -> PlanResult {
    PlanResult {
        status: PlanStatus::Timeout,
        cost: None,
        path: None,
        start_circle: start,
        certificate: None,
        trace: Vec::new(),
        stats: PlanStats::default(),
        config: None,
        reason: Some("planner worker failed".into()),
    }
}

async fn post_plan(
    State(state): State<AppRef>,
    Path(id): Path<String>,
    Json(req): Json<PlanRequest>,
) -> ApiResult<Response> {
    let session = session_or_404(&state, &id)?;
    if let Some(b) = req.budget_s {
        if !(b > 0.0) {
            return Err(ApiError::bad_request("budget_s must be positive"));
        }
    }
    let goal_circle = circle_at(&session.surfaces, req.goal, session.limits.radius, LoiterDirection::Ccw)?;
    let job = {
        let mut inner = session.lock();
        if let Some(active) = inner.active_job.as_deref().and_then(|j| state.job(j)) {
            if active.is_running() {
                return Err(ApiError::new(StatusCode::CONFLICT, "plan_in_progress", "a plan is already running")
                    .with(json!({ "job_id": active.id })));
            }
        }
        let job = Arc::new(Job::new(&session.id, inner.start, req.goal));
        inner.active_job = Some(job.id.clone());
        inner.jobs.push(job.id.clone());
        job
    };
    state.insert_job(job.clone());

    let config = PlannerConfig {
        ds: req.ds,
        seed: req.seed.unwrap_or(0),
        max_time_s: match (req.budget_s, req.iterations) {
            (None, Some(_)) => None,
            (b, _) => Some(b.unwrap_or(state.config.default_budget_s)),
        },
        max_iterations: req.iterations,
        stop_at_first_solution: req.stop_at_first_solution.unwrap_or(false),
        ..Default::default()
    };
    let problem = PlanningProblem {
        surfaces: session.surfaces.clone(),
        start: job.start,
        goal: GoalSpec::Center(req.goal),
        limits: session.limits,
    };
    let worker = job.clone();
    let owner = session.clone();
    tokio::task::spawn_blocking(move || {
        let run = std::panic::catch_unwind(AssertUnwindSafe(|| {
            plan_with(
                &problem,
                &config,
                |event| worker.publish(JobMessage::Improvement(event.clone())),
                Some(worker.cancel_flag()),
            )
        }));
        let result = run.unwrap_or_else(|_| crashed(problem.start));
        {
            let mut inner = owner.lock();
            if inner.active_job.as_deref() == Some(worker.id.as_str()) {
                inner.active_job = None;
            }
        }
        worker.finish(result);
    });

    let body = json!({
        "job_id": job.id,
        "session_id": session.id,
        "start_circle": job.start,
        "goal_circle": goal_circle,
        "events": format!("/jobs/{}/events", job.id),
    });
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

async fn get_job(State(state): State<AppRef>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let job = job_or_404(&state, &id)?;
    let result = job.result();
    Ok(Json(json!({
        "job_id": job.id,
        "session_id": job.session_id,
        "goal": job.goal,
        "start_circle": job.start,
        "running": job.is_running(),
        "events": job.event_count(),
        "incumbent_cost": job.incumbent().map(|e| e.cost),
        "result": result.map(|r| r.report()),
    })))
}

async fn cancel_job(State(state): State<AppRef>, Path(id): Path<String>) -> ApiResult<Response> {
    let job = job_or_404(&state, &id)?;
    job.cancel();
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job.id, "running": job.is_running() }))).into_response())
}

fn job_event(message: &JobMessage) -> Event {
    let (name, data) = match message {
        JobMessage::Improvement(e) => ("improvement", serde_json::to_string(e)),
        JobMessage::Done(s) => ("done", serde_json::to_string(s)),
    };
    Event::default().event(name).data(data.expect("event serializes"))
}

/// History first, then live messages, ending after `done`.
fn job_stream(job: &Job) -> impl Stream<Item = JobMessage> + Send + 'static {
    let (history, rx) = job.subscribe();
    let finished = history.iter().any(JobMessage::is_done);
    let live = stream::unfold((rx, finished), |(mut rx, finished)| async move {
        if finished {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(m) => {
                    let done = m.is_done();
                    return Some((m, (rx, done)));
                }
                Err(RecvError::Lagged(n)) => log::warn!("event subscriber lagged by {n} messages"),
                Err(RecvError::Closed) => return None,
            }
        }
    });
    stream::iter(history).chain(live)
}

async fn job_events(
    State(state): State<AppRef>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let job = job_or_404(&state, &id)?;
    let events = job_stream(&job).map(|m| Ok(job_event(&m)));
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}

#[derive(Debug, Deserialize)]
struct ProfileQuery {
    step: Option<f64>,
}

/// Path altitude against terrain and corridor along the incumbent path.
async fn job_profile(
    State(state): State<AppRef>,
    Path(id): Path<String>,
    Query(q): Query<ProfileQuery>,
) -> ApiResult<Json<Value>> {
    let job = job_or_404(&state, &id)?;
    let session = session_or_404(&state, &job.session_id)?;
    let step = q.step.unwrap_or(5.0);
    if !(step >= 0.1) {
        return Err(ApiError::bad_request("step must be at least 0.1 m"));
    }
    let path = match job.result().and_then(|r| r.path.clone()) {
        Some(p) => p,
        None => match job.incumbent() {
            Some(e) => AirplanePath::from_segments(e.path, CaseTag::Composite),
            None => return Err(ApiError::new(StatusCode::CONFLICT, "no_solution", "the job has no path yet")),
        },
    };
    let set = &session.surfaces;
    let samples: Vec<Value> = path
        .sample_uniform(step)
        .iter()
        .enumerate()
        .map(|(i, st)| {
            json!({
                "s": (i as f64 * step).min(path.length()),
                "p": st.position(),
                "terrain": set.terrain().interpolate(st.x, st.y),
                "d_minus": set.d_minus().interpolate(st.x, st.y),
                "d_plus": set.d_plus().interpolate(st.x, st.y),
            })
        })
        .collect();
    Ok(Json(json!({ "job_id": job.id, "length": path.length(), "step": step, "samples": samples })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitRequest {
    pub job_id: String,
}

async fn post_commit(
    State(state): State<AppRef>,
    Path(id): Path<String>,
    Json(req): Json<CommitRequest>,
) -> ApiResult<Response> {
    let session = session_or_404(&state, &id)?;
    let job = job_or_404(&state, &req.job_id)?;
    if job.session_id != session.id {
        return Err(ApiError::not_found("job in this session", &req.job_id));
    }
    if job.is_running() {
        job.cancel();
        job.wait().await;
    }
    let result = job.result().ok_or_else(|| ApiError::internal("finished job without a result"))?;
    let (Some(goal), Some(path)) = (result.arrival_circle(), result.path.clone()) else {
        return Err(ApiError::new(StatusCode::CONFLICT, "job_not_solved", "the job has no solution to commit")
            .with(json!({ "status": result.status })));
    };
    let leg = {
        let mut inner = session.lock();
        if inner.start != job.start {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "stale_job",
                "the job was planned from a start circle that is no longer current",
            ));
        }
        inner.start = goal;
        inner.legs.push(CommittedLeg {
            job_id: job.id.clone(),
            path: path.clone(),
            start: job.start,
            goal,
            committed_at: std::time::Instant::now(),
        });
        inner.legs.len() - 1
    };
    let body = json!({
        "leg": leg,
        "start_circle": goal,
        "path_length": path.length(),
        "replay": format!("/sessions/{}/replay?leg={leg}", session.id),
    });
    Ok((StatusCode::OK, Json(body)).into_response())
}

#[derive(Debug, Deserialize)]
struct ReplayQuery {
    leg: Option<usize>,
    speed: Option<f64>,
    dt: Option<f64>,
    /// Loiter time appended after the path; defaults to one lap.
    loiter_s: Option<f64>,
    l_bar: Option<f64>,
    /// Server-sent events paced at `dt / rate` of wall-clock time.
    stream: Option<bool>,
    rate: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ReplayBody {
    leg: usize,
    speed: f64,
    dt: f64,
    l_bar: f64,
    loiter_s: f64,
    path_length: f64,
    samples: Vec<ReferenceSample>,
}

async fn get_replay(
    State(state): State<AppRef>,
    Path(id): Path<String>,
    Query(q): Query<ReplayQuery>,
) -> ApiResult<Response> {
    let session = session_or_404(&state, &id)?;
    let leg = {
        let inner = session.lock();
        let index = q.leg.unwrap_or(inner.legs.len().saturating_sub(1));
        inner.legs.get(index).cloned().map(|l| (index, l))
    };
    let (index, leg) = leg.ok_or_else(|| ApiError::not_found("committed leg", &q.leg.map_or("latest".into(), |l| l.to_string())))?;
    let cfg = &state.config;
    let speed = q.speed.unwrap_or(cfg.replay_speed);
    let dt = q.dt.unwrap_or(cfg.replay_dt);
    let l_bar = q.l_bar.unwrap_or(cfg.l_bar);
    if !(speed > 0.0 && dt > 0.0 && l_bar > 0.0) {
        return Err(ApiError::bad_request("speed, dt and l_bar must be positive"));
    }
    let loiter_s = q.loiter_s.unwrap_or(leg.goal.period() / speed).max(0.0);
    let count = (leg.path.length() + speed * loiter_s) / (speed * dt);
    if !(count < cfg.max_replay_samples as f64) {
        return Err(ApiError::bad_request(format!("replay would exceed {} samples", cfg.max_replay_samples)));
    }
    let samples = reference_stream(&leg.path, speed, dt, l_bar, Some((&leg.goal, loiter_s)));
    if !q.stream.unwrap_or(false) {
        let body = ReplayBody { leg: index, speed, dt, l_bar, loiter_s, path_length: leg.path.length(), samples };
        return Ok(Json(body).into_response());
    }
    let rate = q.rate.unwrap_or(1.0);
    if !(rate > 0.0) {
        return Err(ApiError::bad_request("rate must be positive"));
    }
    let period = Duration::from_secs_f64(dt / rate);
    let mut interval = tokio::time::interval(period);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let paced = stream::unfold((samples.into_iter(), interval), |(mut it, mut interval)| async move {
        let sample = it.next()?;
        interval.tick().await;
        let event = Event::default().event("sample").data(serde_json::to_string(&sample).expect("sample serializes"));
        Some((Ok::<_, Infallible>(event), (it, interval)))
    });
    let end = stream::once(async { Ok(Event::default().event("end").data("{}")) });
    Ok(Sse::new(paced.chain(end)).keep_alive(KeepAlive::default()).into_response())
}
