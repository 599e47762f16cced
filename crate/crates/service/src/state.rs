//! Sessions, planning jobs and their event channels.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use serde::Serialize;
use tokio::sync::{broadcast, watch};

use terrain_planner::dubins::{AirplanePath, VehicleLimits};
use terrain_planner::planner::{PlanEvent, PlanResult, PlanStatus};
use terrain_planner::safe_sets::LoiterCircle;
use terrain_planner::terrain::{DiskPadding, LoiterOptions, LoiterSurfaces, SurfaceSet};

const EVENT_CAPACITY: usize = 256;

/// Service-wide defaults.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub replay_speed: f64,
    pub replay_dt: f64,
    pub l_bar: f64,
    pub default_budget_s: f64,
    /// Upper bound on samples returned by one replay request.
    pub max_replay_samples: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { replay_speed: 15.0, replay_dt: 0.1, l_bar: 10.0, default_budget_s: 10.0, max_replay_samples: 500_000 }
    }
}

#[derive(Default)]
pub struct AppState {
    pub config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    jobs: RwLock<HashMap<String, Arc<Job>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        Self { config, ..Default::default() }
    }

    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.read().expect("sessions lock").get(id).cloned()
    }

    pub fn job(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs.read().expect("jobs lock").get(id).cloned()
    }

    pub fn insert_session(&self, session: Arc<Session>) {
        self.sessions.write().expect("sessions lock").insert(session.id.clone(), session);
    }

    pub fn insert_job(&self, job: Arc<Job>) {
        self.jobs.write().expect("jobs lock").insert(job.id.clone(), job);
    }
}

pub fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

#[derive(Debug, Clone)]
pub struct CommittedLeg {
    pub job_id: String,
    pub path: AirplanePath,
    pub start: LoiterCircle,
    pub goal: LoiterCircle,
    pub committed_at: Instant,
}

pub struct SessionInner {
    pub start: LoiterCircle,
    pub active_job: Option<String>,
    pub jobs: Vec<String>,
    pub legs: Vec<CommittedLeg>,
}

pub struct Session {
    pub id: String,
    pub surfaces: Arc<SurfaceSet>,
    pub limits: VehicleLimits,
    pub inner: Mutex<SessionInner>,
    extra_masks: Mutex<HashMap<u64, Arc<LoiterSurfaces>>>,
}

impl Session {
    pub fn new(surfaces: Arc<SurfaceSet>, limits: VehicleLimits, start: LoiterCircle) -> Self {
        Self {
            id: new_id(),
            surfaces,
            limits,
            inner: Mutex::new(SessionInner { start, active_job: None, jobs: Vec::new(), legs: Vec::new() }),
            extra_masks: Mutex::new(HashMap::new()),
        }
    }

    pub fn lock(&self) -> std::sync::MutexGuard<'_, SessionInner> {
        self.inner.lock().expect("session lock")
    }

    /// Loiter surfaces for a radius other than the planning radius, built
    /// on first use and kept for the session lifetime.
    pub fn extra_loiter(&self, radius: f64) -> Result<Arc<LoiterSurfaces>, String> {
        if let Some(hit) = self.extra_masks.lock().expect("mask lock").get(&radius.to_bits()) {
            return Ok(hit.clone());
        }
        let mut options = LoiterOptions::new(radius);
        options.padding = DiskPadding::Meters(self.surfaces.loiter().padding());
        let built = Arc::new(
            LoiterSurfaces::build(self.surfaces.d_plus(), self.surfaces.d_minus(), &options)
                .map_err(|e| e.to_string())?,
        );
        self.extra_masks.lock().expect("mask lock").insert(radius.to_bits(), built.clone());
        Ok(built)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JobSummary {
    pub status: PlanStatus,
    pub cost: Option<f64>,
    pub iterations: u64,
    pub time_to_first_solution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone)]
pub enum JobMessage {
    Improvement(PlanEvent),
    Done(JobSummary),
}

impl JobMessage {
    pub fn is_done(&self) -> bool {
        matches!(self, Self::Done(_))
    }
}

#[derive(Default)]
struct JobLog {
    history: Vec<JobMessage>,
    result: Option<Arc<PlanResult>>,
}

/// One planner run. Late subscribers receive the full history first, then
/// live messages, with no gap between the two.
pub struct Job {
    pub id: String,
    pub session_id: String,
    pub goal: [f64; 2],
    pub start: LoiterCircle,
    pub created: Instant,
    log: Mutex<JobLog>,
    tx: broadcast::Sender<JobMessage>,
    done: watch::Sender<bool>,
    cancel: AtomicBool,
}

impl Job {
    pub fn new(session_id: &str, start: LoiterCircle, goal: [f64; 2]) -> Self {
        let (tx, _) = broadcast::channel(EVENT_CAPACITY);
        let (done, _) = watch::channel(false);
        Self {
            id: new_id(),
            session_id: session_id.to_string(),
            goal,
            start,
            created: Instant::now(),
            log: Mutex::new(JobLog::default()),
            tx,
            done,
            cancel: AtomicBool::new(false),
        }
    }

    pub fn publish(&self, message: JobMessage) {
        let mut log = self.log.lock().expect("job lock");
        log.history.push(message.clone());
        let _ = self.tx.send(message);
    }

    pub fn finish(&self, result: PlanResult) {
        let summary = JobSummary {
            status: result.status,
            cost: result.cost,
            iterations: result.stats.iterations,
            time_to_first_solution: result.stats.time_to_first_solution,
            reason: result.reason.clone(),
        };
        self.log.lock().expect("job lock").result = Some(Arc::new(result));
        self.done.send_replace(true);
        self.publish(JobMessage::Done(summary));
    }

    pub fn subscribe(&self) -> (Vec<JobMessage>, broadcast::Receiver<JobMessage>) {
        let log = self.log.lock().expect("job lock");
        (log.history.clone(), self.tx.subscribe())
    }

    pub fn result(&self) -> Option<Arc<PlanResult>> {
        self.log.lock().expect("job lock").result.clone()
    }

    pub fn incumbent(&self) -> Option<PlanEvent> {
        let log = self.log.lock().expect("job lock");
        log.history.iter().rev().find_map(|m| match m {
            JobMessage::Improvement(e) => Some(e.clone()),
            JobMessage::Done(_) => None,
        })
    }

    pub fn event_count(&self) -> usize {
        self.log.lock().expect("job lock").history.len()
    }

    pub fn is_running(&self) -> bool {
        !*self.done.borrow()
    }

    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::Relaxed);
    }

    pub fn cancel_flag(&self) -> &AtomicBool {
        &self.cancel
    }

    pub async fn wait(&self) {
        let mut rx = self.done.subscribe();
        let _ = rx.wait_for(|done| *done).await;
    }
}
