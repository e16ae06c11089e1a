//! HTTP access to dialogue sessions.
//!
//! Every route ends in [`Session::execute_mut`]: the generic command route
//! forwards dialogue text unchanged, and the convenience routes build the
//! equivalent command line. Replies are the same JSON the command line
//! prints with `--json`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use lexdialog_core::{DecisionConfig, ErrorCode, Reply, Session};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::{Mutex, Semaphore};

#[derive(Debug, Clone)]
pub struct Config {
    pub addr: SocketAddr,
    /// Search budget applied to every query (states and candidates).
    pub budget: Option<u64>,
    /// Idle time after which a session is evicted.
    pub session_ttl: Duration,
    /// Queries allowed to run at once.
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            budget: None,
            session_ttl: Duration::from_secs(1800),
            workers: std::thread::available_parallelism().map_or(4, |n| n.get()),
        }
    }
}

impl Config {
    /// Reads `LEXDIALOG_ADDR`, `LEXDIALOG_BUDGET` and
    /// `LEXDIALOG_SESSION_TTL_SECS`, keeping defaults for unset variables.
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let mut c = Config::default();
        if let Some(a) = get("LEXDIALOG_ADDR") {
            c.addr = a.parse().map_err(|e| format!("LEXDIALOG_ADDR={a:?}: {e}"))?;
        }
        if let Some(b) = get("LEXDIALOG_BUDGET") {
            match b.parse::<u64>() {
                Ok(n) if n > 0 => c.budget = Some(n),
                _ => return Err(format!("LEXDIALOG_BUDGET={b:?}: expected a positive integer")),
            }
        }
        if let Some(t) = get("LEXDIALOG_SESSION_TTL_SECS") {
            match t.parse::<u64>() {
                Ok(n) if n > 0 => c.session_ttl = Duration::from_secs(n),
                _ => return Err(format!("LEXDIALOG_SESSION_TTL_SECS={t:?}: expected a positive integer")),
            }
        }
        Ok(c)
    }
}

struct Entry {
    /// Commands lock this in arrival order (the lock is fair), which keeps
    /// each session single-writer.
    session: Mutex<Session>,
    cancel: Arc<AtomicBool>,
    last_active: std::sync::Mutex<Instant>,
}

impl Entry {
    fn touch(&self) {
        *self.last_active.lock().expect("activity lock") = Instant::now();
    }
}

pub struct AppState {
    config: Config,
    sessions: std::sync::Mutex<HashMap<String, Arc<Entry>>>,
    workers: Arc<Semaphore>,
}

impl AppState {
    pub fn new(config: Config) -> Arc<Self> {
        Arc::new(AppState {
            workers: Arc::new(Semaphore::new(config.workers.max(1))),
            config,
            sessions: std::sync::Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session table").len()
    }

    fn get(&self, id: &str) -> Option<Arc<Entry>> {
        self.sessions.lock().expect("session table").get(id).cloned()
    }

    fn create(&self) -> String {
        let cancel = Arc::new(AtomicBool::new(false));
        let mut config = DecisionConfig {
            cancel: Some(cancel.clone()),
            ..DecisionConfig::default()
        };
        if let Some(b) = self.config.budget {
            config.state_budget = usize::try_from(b).unwrap_or(usize::MAX);
            config.candidate_budget = b;
        }
        let entry = Arc::new(Entry {
            session: Mutex::new(Session::with_config(config).without_file_access()),
            cancel,
            last_active: std::sync::Mutex::new(Instant::now()),
        });
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.sessions.lock().expect("session table").insert(id.clone(), entry);
        id
    }

    /// Removes a session and cancels any query it is running.
    fn remove(&self, id: &str) -> bool {
        match self.sessions.lock().expect("session table").remove(id) {
            Some(e) => {
                e.cancel.store(true, Ordering::Relaxed);
                true
            }
            None => false,
        }
    }

    /// Evicts sessions idle for longer than the configured TTL; a session
    /// with a command in progress is not idle. Returns how many went.
    pub fn evict_idle(&self) -> usize {
        let ttl = self.config.session_ttl;
        let mut table = self.sessions.lock().expect("session table");
        let before = table.len();
        table.retain(|_, e| {
            let idle = e.last_active.lock().expect("activity lock").elapsed() > ttl;
            let busy = e.session.try_lock().is_err();
            if idle && !busy {
                e.cancel.store(true, Ordering::Relaxed);
                false
            } else {
                true
            }
        });
        before - table.len()
    }
}

/// Periodically evicts idle sessions until the runtime shuts down.
pub fn spawn_reaper(state: Arc<AppState>) -> tokio::task::JoinHandle<()> {
    let period = (state.config.session_ttl / 4).clamp(Duration::from_millis(10), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let n = state.evict_idle();
            if n > 0 {
                tracing::info!(evicted = n, "idle sessions evicted");
            }
        }
    })
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", delete(delete_session))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/laws", post(define_law))
        .route("/cases", post(define_case))
        .route("/queries/implies", post(query_implies))
        .with_state(state)
}

/// Binds, serves and evicts idle sessions until ctrl-c.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let state = AppState::new(config);
    let reaper = spawn_reaper(state.clone());
    let listener = tokio::net::TcpListener::bind(state.config.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let result = axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    reaper.abort();
    result
}

/// HTTP status for a reply: 200 unless it is an error.
pub fn status_for(reply: &Reply) -> StatusCode {
    match reply.error_code() {
        None => StatusCode::OK,
        Some(code) => match code {
            ErrorCode::UnknownCommand
            | ErrorCode::Usage
            | ErrorCode::ParseError
            | ErrorCode::DataError
            | ErrorCode::DuplicateName
            | ErrorCode::NoSignature
            | ErrorCode::NoWitness => StatusCode::BAD_REQUEST,
            ErrorCode::UnknownName => StatusCode::NOT_FOUND,
            ErrorCode::LayerMismatch | ErrorCode::SignatureMismatch => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::ResourceLimit => StatusCode::TOO_MANY_REQUESTS,
            ErrorCode::Io | ErrorCode::Cancelled => StatusCode::INTERNAL_SERVER_ERROR,
        },
    }
}

fn reply_response(reply: &Reply) -> Response {
    (status_for(reply), Json(reply)).into_response()
}

fn error_response(status: StatusCode, code: ErrorCode, message: impl Into<String>) -> Response {
    (status, Json(Reply::error(code, message))).into_response()
}

fn no_session(id: &str) -> Response {
    error_response(StatusCode::NOT_FOUND, ErrorCode::UnknownName, format!("no session {id}"))
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, serde_json::Error> {
    serde_json::from_slice(bytes)
}

fn malformed(e: serde_json::Error) -> Response {
    error_response(StatusCode::BAD_REQUEST, ErrorCode::Usage, format!("malformed request body: {e}"))
}

/// Runs one command on a worker thread, in order with the session's other
/// commands.
async fn run_command(state: &AppState, id: &str, command: String) -> Response {
    let Some(entry) = state.get(id) else {
        return no_session(id);
    };
    let mut guard = entry.session.lock().await;
    entry.touch();
    let Ok(_permit) = state.workers.clone().acquire_owned().await else {
        return error_response(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::Io, "worker pool closed");
    };
    let mut working = guard.clone();
    let done = tokio::task::spawn_blocking(move || {
        let reply = working.execute_mut(&command);
        (working, reply)
    })
    .await;
    entry.touch();
    match done {
        Ok((next, reply)) => {
            *guard = next;
            reply_response(&reply)
        }
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::Io, format!("query failed: {e}")),
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    Json(json!({"status": "ok", "sessions": state.session_count()})).into_response()
}

async fn create_session(State(state): State<Arc<AppState>>) -> Response {
    let id = state.create();
    (StatusCode::CREATED, Json(json!({"id": id}))).into_response()
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    if state.remove(&id) {
        StatusCode::NO_CONTENT.into_response()
    } else {
        no_session(&id)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandBody {
    command: String,
}

async fn command(State(state): State<Arc<AppState>>, Path(id): Path<String>, bytes: Bytes) -> Response {
    match body::<CommandBody>(&bytes) {
        Ok(b) => run_command(&state, &id, b.command).await,
        Err(e) => malformed(e),
    }
}

async fn transcript(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let Some(entry) = state.get(&id) else {
        return no_session(&id);
    };
    let text = entry.session.lock().await.transcript();
    entry.touch();
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response()
}

/// Formulas may span lines in a request; commands are single lines.
fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LawBody {
    session: String,
    name: String,
    formula: String,
}

async fn define_law(State(state): State<Arc<AppState>>, bytes: Bytes) -> Response {
    match body::<LawBody>(&bytes) {
        Ok(b) => {
            let command = format!("law {} = {}", b.name, one_line(&b.formula));
            run_command(&state, &b.session, command).await
        }
        Err(e) => malformed(e),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseBody {
    session: String,
    name: String,
    /// Case-file or trace-file JSON.
    case: serde_json::Value,
}

async fn define_case(State(state): State<Arc<AppState>>, bytes: Bytes) -> Response {
    match body::<CaseBody>(&bytes) {
        Ok(b) => {
            let command = format!("case {} = {}", b.name, b.case);
            run_command(&state, &b.session, command).await
        }
        Err(e) => malformed(e),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ImpliesBody {
    session: String,
    law: String,
    prop: String,
    #[serde(default)]
    bound: Option<u64>,
}

async fn query_implies(State(state): State<Arc<AppState>>, bytes: Bytes) -> Response {
    match body::<ImpliesBody>(&bytes) {
        Ok(b) => {
            let bound = b.bound.map(|n| format!(" bound {n}")).unwrap_or_default();
            let command = format!("implies {} {}{bound}", b.law, b.prop);
            run_command(&state, &b.session, command).await
        }
        Err(e) => malformed(e),
    }
}
