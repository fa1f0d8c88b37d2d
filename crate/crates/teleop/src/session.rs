use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use navbench_core::harness::{load_suite, write_rows, EpisodeRunner, HarnessError, LoadedScenario, ResultRow, WorldConfig};
use navbench_core::world::{map_to_text, WorldMap};
use serde::{Deserialize, Serialize};

use crate::protocol::{ActionMessage, EpisodeSummary, ObsMessage, ServerMessage};

#[derive(Debug, thiserror::Error)]
pub enum TeleopError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("suite {0} has no scenarios")]
    EmptySuite(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

#[derive(Debug, Clone)]
pub struct TeleopConfig {
    pub world: WorldConfig,
    /// Minimum time between accepted actions. 100 ms is the 10 actions per
    /// second of the agents' budget.
    pub min_interval: Duration,
    /// Include the true pose in observations and serve ground-truth maps.
    pub debug_overlay: bool,
    /// Rewrite this CSV with every finished episode.
    pub results_path: Option<PathBuf>,
    /// Suite used when a create request names none.
    pub default_suite: Option<String>,
}

impl Default for TeleopConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            min_interval: Duration::from_millis(100),
            debug_overlay: false,
            results_path: None,
            default_suite: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionStatus {
    Awaiting,
    Running,
    Finished,
}

/// Snapshot served by `GET /sessions/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub operator: String,
    pub suite: String,
    pub status: SessionStatus,
    pub episodes_done: usize,
    pub episodes_total: usize,
    pub scenario_id: Option<String>,
    pub step: Option<usize>,
    pub budget_left: Option<usize>,
}

struct Session {
    id: String,
    operator: String,
    suite: String,
    queue: Vec<LoadedScenario>,
    next: usize,
    runner: Option<EpisodeRunner>,
    status: SessionStatus,
    done: usize,
    last_accept: Option<Instant>,
}

impl Session {
    fn info(&self) -> SessionInfo {
        let r = self.runner.as_ref().filter(|_| self.status == SessionStatus::Running);
        SessionInfo {
            id: self.id.clone(),
            operator: self.operator.clone(),
            suite: self.suite.clone(),
            status: self.status,
            episodes_done: self.done,
            episodes_total: self.queue.len(),
            scenario_id: r.map(|r| r.scenario().scenario.id.clone()),
            step: r.map(EpisodeRunner::step_index),
            budget_left: r.map(EpisodeRunner::budget_left),
        }
    }

    /// Load the next scenario, or finish.
    fn advance(&mut self, world: &WorldConfig, overlay: bool) -> ServerMessage {
        match self.queue.get(self.next) {
            Some(task) => {
                self.next += 1;
                self.runner = Some(EpisodeRunner::new(task, world, self.operator.as_str()));
                self.status = SessionStatus::Running;
                self.observation(overlay)
            }
            None => {
                self.runner = None;
                self.status = SessionStatus::Finished;
                ServerMessage::Finished { episodes: self.done }
            }
        }
    }

    fn observation(&self, overlay: bool) -> ServerMessage {
        let r = self.runner.as_ref().expect("running session has an episode");
        ServerMessage::Obs(ObsMessage::new(&r.scenario().scenario.id, &r.observation(), overlay.then(|| r.pose())))
    }
}

/// All live sessions plus the shared results store. Cheap to clone.
#[derive(Clone)]
pub struct SessionManager {
    inner: Arc<Inner>,
}

struct Inner {
    cfg: TeleopConfig,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    results: Mutex<Vec<ResultRow>>,
    maps: Mutex<HashMap<String, Arc<WorldMap>>>,
    counter: AtomicU64,
}

fn map_id(name: &str) -> String {
    Path::new(name)
        .file_stem()
        .map_or_else(|| name.to_string(), |s| s.to_string_lossy().into_owned())
}

impl SessionManager {
    pub fn new(cfg: TeleopConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                cfg,
                sessions: Mutex::new(HashMap::new()),
                results: Mutex::new(Vec::new()),
                maps: Mutex::new(HashMap::new()),
                counter: AtomicU64::new(0),
            }),
        }
    }

    pub fn config(&self) -> &TeleopConfig {
        &self.inner.cfg
    }

    /// New session over the scenarios in `suite`, waiting for its stream.
    pub fn create(&self, suite: &str, operator: &str) -> Result<String, TeleopError> {
        let queue = match load_suite(suite, &self.inner.cfg.world.body) {
            Err(HarnessError::NotFound(m)) => return Err(TeleopError::NotFound(m)),
            Err(HarnessError::Empty) => return Err(TeleopError::EmptySuite(suite.to_string())),
            other => other?,
        };
        {
            let mut maps = self.inner.maps.lock().expect("maps lock");
            for t in &queue {
                maps.entry(map_id(&t.scenario.map)).or_insert_with(|| t.world.clone());
            }
        }
        let id = format!("s{}", self.inner.counter.fetch_add(1, Ordering::Relaxed) + 1);
        let session = Session {
            id: id.clone(),
            operator: operator.to_string(),
            suite: suite.to_string(),
            queue,
            next: 0,
            runner: None,
            status: SessionStatus::Awaiting,
            done: 0,
            last_accept: None,
        };
        self.inner.sessions.lock().expect("sessions lock").insert(id.clone(), Arc::new(Mutex::new(session)));
        log::info!("session {id} for {operator} on {suite}");
        Ok(id)
    }

    fn session(&self, id: &str) -> Option<Arc<Mutex<Session>>> {
        self.inner.sessions.lock().expect("sessions lock").get(id).cloned()
    }

    pub fn info(&self, id: &str) -> Option<SessionInfo> {
        self.session(id).map(|s| s.lock().expect("session lock").info())
    }

    /// Messages to send when a stream attaches: the current observation,
    /// starting the first episode if needed.
    pub fn attach(&self, id: &str) -> Result<ServerMessage, TeleopError> {
        let s = self.session(id).ok_or_else(|| TeleopError::NotFound(format!("session {id}")))?;
        let mut s = s.lock().expect("session lock");
        Ok(match s.status {
            SessionStatus::Awaiting => s.advance(&self.inner.cfg.world, self.inner.cfg.debug_overlay),
            SessionStatus::Running => s.observation(self.inner.cfg.debug_overlay),
            SessionStatus::Finished => ServerMessage::Finished { episodes: s.done },
        })
    }

    /// How long the caller should wait before submitting, to respect the
    /// action-rate cap.
    pub fn pacing_delay(&self, id: &str) -> Duration {
        let Some(s) = self.session(id) else { return Duration::ZERO };
        let s = s.lock().expect("session lock");
        s.last_accept
            .map_or(Duration::ZERO, |t| self.inner.cfg.min_interval.saturating_sub(t.elapsed()))
    }

    /// Apply one action. Returns the messages for the client: the next
    /// observation, or a summary followed by the next episode's first
    /// observation (or `Finished`).
    pub fn submit(&self, id: &str, msg: ActionMessage) -> Vec<ServerMessage> {
        let Some(s) = self.session(id) else {
            return vec![ServerMessage::Error { message: format!("no session {id}") }];
        };
        let mut s = s.lock().expect("session lock");
        if s.status != SessionStatus::Running {
            return vec![ServerMessage::Error {
                message: format!("session is {:?}, not accepting actions", s.status),
            }];
        }
        let overlay = self.inner.cfg.debug_overlay;
        let runner = s.runner.as_mut().expect("running session has an episode");
        if msg.step != runner.step_index() {
            return vec![ServerMessage::Rejected {
                expected_step: runner.step_index(),
                reason: format!("action answers step {}", msg.step),
            }];
        }
        let ended = runner.apply(msg.action).cloned();
        s.last_accept = Some(Instant::now());
        match ended {
            None => vec![s.observation(overlay)],
            Some(result) => {
                s.done += 1;
                self.record(ResultRow::from(&result));
                let summary = ServerMessage::Summary(Box::new(EpisodeSummary::from(&result)));
                vec![summary, s.advance(&self.inner.cfg.world, overlay)]
            }
        }
    }

    fn record(&self, row: ResultRow) {
        let mut rows = self.inner.results.lock().expect("results lock");
        rows.push(row);
        if let Some(path) = &self.inner.cfg.results_path {
            let written = std::fs::File::create(path).map_err(HarnessError::from).and_then(|f| write_rows(&rows, f));
            if let Err(e) = written {
                log::error!("writing {}: {e}", path.display());
            }
        }
    }

    /// Every finished episode, in completion order.
    pub fn results(&self) -> Vec<ResultRow> {
        self.inner.results.lock().expect("results lock").clone()
    }

    /// Ground-truth map text, only with the debug overlay on. The id is
    /// the map file's stem.
    pub fn map_text(&self, id: &str) -> Result<Option<String>, ()> {
        if !self.inner.cfg.debug_overlay {
            return Err(());
        }
        Ok(self.inner.maps.lock().expect("maps lock").get(id).map(|m| map_to_text(m)))
    }
}
