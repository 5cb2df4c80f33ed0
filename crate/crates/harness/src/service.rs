//! HTTP service for a live console: state and event polling plus the human
//! control channels (pause, critique, task).
//!
//! The agent loop runs on its own thread and is the only writer. It talks to
//! the service through [`HttpSupervisor`]; handlers only read snapshots or
//! enqueue requests.

use std::collections::VecDeque;
use std::net::SocketAddr;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::JoinHandle;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use voyager_core::agent::{Snapshot, Supervisor};
use voyager_core::events::RunEvent;
use voyager_core::verifier::VerificationResult;

#[derive(Debug, Default)]
struct Inner {
    snapshot: Option<Snapshot>,
    events: Vec<RunEvent>,
    paused: bool,
    critique_pending: bool,
    critiques: VecDeque<VerificationResult>,
    tasks: VecDeque<String>,
    finished: bool,
}

/// State shared between the agent thread and the HTTP handlers.
#[derive(Debug, Default)]
pub struct Shared {
    inner: Mutex<Inner>,
    changed: Condvar,
}

impl Shared {
    pub fn new() -> Arc<Shared> {
        Arc::new(Shared::default())
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // a panicking handler must not wedge the run
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn wait<'a>(&self, guard: MutexGuard<'a, Inner>) -> MutexGuard<'a, Inner> {
        self.changed.wait(guard).unwrap_or_else(|p| p.into_inner())
    }

    pub fn publish_snapshot(&self, snapshot: &Snapshot) {
        self.lock().snapshot = Some(snapshot.clone());
        self.changed.notify_all();
    }

    /// Marks the run over and releases anything blocked on a human.
    pub fn finish(&self) {
        let mut g = self.lock();
        g.finished = true;
        g.paused = false;
        g.critique_pending = false;
        drop(g);
        self.changed.notify_all();
    }

    pub fn set_paused(&self, paused: bool) {
        self.lock().paused = paused;
        self.changed.notify_all();
    }

    pub fn enqueue_task(&self, description: String) {
        self.lock().tasks.push_back(description);
        self.changed.notify_all();
    }

    /// Hands a verdict to the waiting loop; `false` when none is awaited.
    pub fn submit_critique(&self, verdict: VerificationResult) -> bool {
        let mut g = self.lock();
        if !g.critique_pending {
            return false;
        }
        g.critique_pending = false;
        g.critiques.push_back(verdict);
        drop(g);
        self.changed.notify_all();
        true
    }

    pub fn state(&self) -> StateView {
        let g = self.lock();
        StateView {
            snapshot: g.snapshot.clone(),
            paused: g.paused,
            critique_pending: g.critique_pending,
            queued_tasks: g.tasks.len(),
            events: g.events.len(),
            finished: g.finished,
        }
    }

    /// Events from `cursor` on, or `None` when the cursor is past the end.
    pub fn events_from(&self, cursor: usize) -> Option<EventsPage> {
        let g = self.lock();
        let events = g.events.get(cursor..)?.to_vec();
        Some(EventsPage {
            next_cursor: g.events.len(),
            events,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    /// The latest round-boundary snapshot; `None` before the first one.
    pub snapshot: Option<Snapshot>,
    pub paused: bool,
    pub critique_pending: bool,
    pub queued_tasks: usize,
    /// Events published so far (the cursor of the next new event).
    pub events: usize,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventsPage {
    pub events: Vec<RunEvent>,
    pub next_cursor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritiqueBody {
    pub success: bool,
    #[serde(default)]
    pub critique: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskBody {
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlAction {
    Pause,
    Resume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlBody {
    pub action: ControlAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

/// The loop-side half of the service.
pub struct HttpSupervisor {
    shared: Arc<Shared>,
}

impl HttpSupervisor {
    pub fn new(shared: Arc<Shared>) -> Self {
        HttpSupervisor { shared }
    }
}

impl Supervisor for HttpSupervisor {
    fn on_event(&mut self, event: &RunEvent) {
        self.shared.lock().events.push(event.clone());
        self.shared.changed.notify_all();
    }

    fn checkpoint(&mut self, snapshot: &Snapshot) {
        let mut g = self.shared.lock();
        g.snapshot = Some(snapshot.clone());
        while g.paused && !g.finished {
            g = self.shared.wait(g);
        }
    }

    fn human_task(&mut self, snapshot: &Snapshot) -> Option<String> {
        let mut g = self.shared.lock();
        g.snapshot = Some(snapshot.clone());
        loop {
            if let Some(t) = g.tasks.pop_front() {
                return Some(t);
            }
            if g.finished {
                return None;
            }
            g = self.shared.wait(g);
        }
    }

    fn human_critique(&mut self, snapshot: &Snapshot) -> Option<VerificationResult> {
        let mut g = self.shared.lock();
        g.snapshot = Some(snapshot.clone());
        g.critique_pending = true;
        self.shared.changed.notify_all();
        loop {
            if let Some(v) = g.critiques.pop_front() {
                return Some(v);
            }
            if g.finished {
                return None;
            }
            g = self.shared.wait(g);
        }
    }
}

fn reject(status: StatusCode, error: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: error.into() })).into_response()
}

async fn get_state(State(shared): State<Arc<Shared>>) -> Json<StateView> {
    Json(shared.state())
}

#[derive(Debug, Deserialize)]
struct CursorQuery {
    #[serde(default)]
    cursor: usize,
}

async fn get_events(State(shared): State<Arc<Shared>>, Query(q): Query<CursorQuery>) -> Response {
    match shared.events_from(q.cursor) {
        Some(page) => Json(page).into_response(),
        None => reject(StatusCode::BAD_REQUEST, "cursor is past the end of the stream"),
    }
}

async fn post_critique(State(shared): State<Arc<Shared>>, Json(body): Json<CritiqueBody>) -> Response {
    let verdict = VerificationResult {
        success: body.success,
        critique: if body.success { String::new() } else { body.critique },
        raw_reasoning: "human".into(),
    };
    if shared.submit_critique(verdict) {
        StatusCode::ACCEPTED.into_response()
    } else {
        reject(StatusCode::CONFLICT, "no verification is pending")
    }
}

async fn post_task(State(shared): State<Arc<Shared>>, Json(body): Json<TaskBody>) -> Response {
    let description = body.description.trim();
    if description.is_empty() {
        return reject(StatusCode::UNPROCESSABLE_ENTITY, "task description is empty");
    }
    shared.enqueue_task(description.to_string());
    StatusCode::ACCEPTED.into_response()
}

async fn post_control(State(shared): State<Arc<Shared>>, Json(body): Json<ControlBody>) -> Json<StateView> {
    shared.set_paused(body.action == ControlAction::Pause);
    Json(shared.state())
}

pub fn router(shared: Arc<Shared>) -> Router {
    Router::new()
        .route("/api/state", get(get_state))
        .route("/api/events", get(get_events))
        .route("/api/critique", post(post_critique))
        .route("/api/task", post(post_task))
        .route("/api/control", post(post_control))
        .with_state(shared)
}

/// A running server on its own thread and runtime.
pub struct Server {
    pub addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl Server {
    /// Binds `addr` (port 0 picks a free one) and starts serving.
    pub fn start(shared: Arc<Shared>, addr: SocketAddr) -> std::io::Result<Server> {
        let listener = std::net::TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = match tokio::net::TcpListener::from_std(listener) {
                    Ok(l) => l,
                    Err(e) => {
                        log::error!("cannot serve: {e}");
                        return;
                    }
                };
                let served = axum::serve(listener, router(shared))
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
                if let Err(e) = served {
                    log::error!("server stopped: {e}");
                }
            });
        });
        log::info!("console API listening on http://{addr}");
        Ok(Server {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn stop(mut self) {
        self.shutdown_now();
    }

    fn shutdown_now(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.shutdown_now();
    }
}
