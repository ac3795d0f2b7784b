//! HTTP service over an in-memory [`SessionStore`].
//!
//! Every body is JSON. Comparison pairs are 1-based on the wire.

use std::collections::HashMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use ahp_core::banking::BUNDLED_MODEL;
use ahp_core::document::{load_model, load_session, parse_ratio, save_model, save_session, Model};
use ahp_core::elicitation::{allowed_values_hint, NodeProgress};
use ahp_core::{
    DocumentError, ElicitationError, ElicitationSession, Mode, SolverOptions, VerbalJudgment,
};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ops::{self, to_pretty, Failure, SensitivityRequest};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const MODEL_HASH_HEADER: &str = "ahp-model-hash";

type SessionCell = Arc<Mutex<ElicitationSession>>;

/// Models keyed by hash and sessions keyed by id. Models are immutable once
/// stored; each session has its own lock so writes to it are serialized.
pub struct SessionStore {
    models: RwLock<HashMap<String, Arc<Model>>>,
    sessions: RwLock<HashMap<String, SessionCell>>,
    snapshot_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new(snapshot_dir: Option<PathBuf>) -> Self {
        Self { models: RwLock::default(), sessions: RwLock::default(), snapshot_dir }
    }

    /// Stores `model` unless an identical one is present. Returns its hash and
    /// whether it was new.
    pub fn insert_model(&self, model: Model) -> Result<(String, bool), Failure> {
        let hash = model.hash();
        let mut models = self.models.write().expect("model lock");
        if models.contains_key(&hash) {
            return Ok((hash, false));
        }
        if let Some(dir) = &self.snapshot_dir {
            write_snapshot(&dir.join("models").join(format!("{hash}.json")), &save_model(&model))?;
        }
        models.insert(hash.clone(), Arc::new(model));
        Ok((hash, true))
    }

    pub fn model(&self, hash: &str) -> Option<Arc<Model>> {
        self.models.read().expect("model lock").get(hash).cloned()
    }

    pub fn insert_session(&self, s: ElicitationSession) -> Result<SessionCell, Failure> {
        self.snapshot(&s)?;
        let id = s.id.clone();
        let cell = Arc::new(Mutex::new(s));
        self.sessions.write().expect("session lock").insert(id, cell.clone());
        Ok(cell)
    }

    pub fn session(&self, id: &str) -> Option<SessionCell> {
        self.sessions.read().expect("session lock").get(id).cloned()
    }

    fn snapshot(&self, s: &ElicitationSession) -> Result<(), Failure> {
        match &self.snapshot_dir {
            Some(dir) => write_snapshot(&dir.join("sessions").join(format!("{}.json", s.id)), &save_session(s)),
            None => Ok(()),
        }
    }

    /// Reloads models and sessions written to the snapshot directory.
    /// Returns the number of sessions restored.
    pub fn restore(&self) -> Result<usize, Failure> {
        let Some(dir) = self.snapshot_dir.clone() else { return Ok(0) };
        for bytes in read_dir_files(&dir.join("models"))? {
            let m = load_model(&bytes, &SolverOptions::default())?;
            self.insert_model(m)?;
        }
        let mut restored = 0;
        for bytes in read_dir_files(&dir.join("sessions"))? {
            let s = load_session(&bytes, None)?;
            if self.model(&s.model_hash).is_some() {
                let id = s.id.clone();
                self.sessions.write().expect("session lock").insert(id, Arc::new(Mutex::new(s)));
                restored += 1;
            }
        }
        Ok(restored)
    }
}

fn write_snapshot(path: &FsPath, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_dir_files(dir: &FsPath) -> Result<Vec<Vec<u8>>, Failure> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| Ok(std::fs::read(p)?)).collect()
}

pub struct AppState {
    pub store: SessionStore,
    pub opts: SolverOptions,
    pub banking_hash: String,
}

impl AppState {
    /// A state with the bundled banking model preloaded.
    pub fn new(store: SessionStore, opts: SolverOptions) -> Result<Self, Failure> {
        let banking = load_model(BUNDLED_MODEL.as_bytes(), &opts)?;
        let (banking_hash, _) = store.insert_model(banking)?;
        Ok(Self { store, opts, banking_hash })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/models", post(create_model))
        .route("/models/{hash}", get(get_model))
        .route("/models/{hash}/results", get(model_results))
        .route("/models/{hash}/sensitivity", post(model_sensitivity))
        .route("/banking-model", get(banking_model))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/next", get(next_question))
        .route("/sessions/{id}/judgments", post(submit_judgment))
        .route("/sessions/{id}/status", get(session_status))
        .route("/sessions/{id}/results", get(session_results))
        .route("/sessions/{id}/sensitivity", post(session_sensitivity))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: json!({ "error": code, "message": message.into() }) }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no {what} `{id}`"))
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed", message)
    }

    fn invalid_judgment(message: impl Into<String>) -> Self {
        let mut e = Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_judgment", message);
        e.body["allowed"] = json!(allowed_values_hint());
        e
    }

    fn from_failure(status: StatusCode, code: &str, f: Failure) -> Self {
        let mut e = Self::new(status, code, f.message);
        e.body["module"] = json!(f.module);
        e
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, json_headers(), to_pretty(&self.body)).into_response()
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        let status = match e {
            DocumentError::Syntax { .. } | DocumentError::UnsupportedVersion { .. } | DocumentError::WrongKind { .. } => {
                StatusCode::BAD_REQUEST
            }
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::from_failure(status, "invalid_document", e.into())
    }
}

/// Failures computing results or sensitivity for a stored model or session.
fn compute_error(f: Failure, incomplete: bool) -> ApiError {
    if incomplete {
        ApiError::from_failure(StatusCode::CONFLICT, "incomplete", f)
    } else {
        ApiError::from_failure(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", f)
    }
}

fn json_headers() -> [(header::HeaderName, HeaderValue); 1] {
    [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))]
}

fn json_ok(bytes: Vec<u8>) -> Response {
    (StatusCode::OK, json_headers(), bytes).into_response()
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

type ApiResult = Result<Response, ApiError>;

fn model_or_404(state: &AppState, hash: &str) -> Result<Arc<Model>, ApiError> {
    state.store.model(hash).ok_or_else(|| ApiError::not_found("model", hash))
}

fn session_or_404(state: &AppState, id: &str) -> Result<SessionCell, ApiError> {
    state.store.session(id).ok_or_else(|| ApiError::not_found("session", id))
}

#[derive(Serialize)]
struct ModelCreated<'a> {
    model_hash: &'a str,
    name: Option<&'a str>,
    /// Nodes whose judgment matrices still have missing pairs.
    incomplete_nodes: Vec<&'a str>,
}

async fn create_model(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let model = load_model(&body, &state.opts)?;
    let (hash, created) =
        state.store.insert_model(model).map_err(|f| ApiError::from_failure(StatusCode::INTERNAL_SERVER_ERROR, "io", f))?;
    let model = model_or_404(&state, &hash)?;
    let doc = ModelCreated {
        model_hash: &hash,
        name: model.name.as_deref(),
        incomplete_nodes: model.partial.iter().map(|p| p.node()).collect(),
    };
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, json_headers(), to_pretty(&doc)).into_response())
}

async fn get_model(State(state): State<Arc<AppState>>, Path(hash): Path<String>) -> ApiResult {
    Ok(json_ok(save_model(&*model_or_404(&state, &hash)?)))
}

async fn banking_model(State(state): State<Arc<AppState>>) -> ApiResult {
    let model = model_or_404(&state, &state.banking_hash)?;
    let mut resp = json_ok(save_model(&model));
    resp.headers_mut()
        .insert(MODEL_HASH_HEADER, HeaderValue::from_str(&state.banking_hash).expect("hex is a valid header"));
    Ok(resp)
}

async fn model_results(State(state): State<Arc<AppState>>, Path(hash): Path<String>) -> ApiResult {
    let model = model_or_404(&state, &hash)?;
    let bytes = ops::results_bytes(&model, None, &state.opts).map_err(|f| compute_error(f, !model.partial.is_empty()))?;
    Ok(json_ok(bytes))
}

async fn model_sensitivity(State(state): State<Arc<AppState>>, Path(hash): Path<String>, body: Bytes) -> ApiResult {
    let model = model_or_404(&state, &hash)?;
    let req: SensitivityRequest = parse_body(&body)?;
    let doc = ops::sensitivity_query(&model, None, &req, &state.opts)
        .map_err(|f| compute_error(f, !model.partial.is_empty()))?;
    Ok(json_ok(to_pretty(&doc)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    model_hash: String,
    #[serde(default)]
    mode: Mode,
    /// Start from the judgments already stored in the model.
    #[serde(default)]
    prefill: bool,
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: CreateSession = parse_body(&body)?;
    let model = model_or_404(&state, &req.model_hash)?;
    let id = uuid::Uuid::new_v4().to_string();
    let session = if req.prefill {
        model.to_session(id, req.mode).map_err(|e| ApiError::invalid_judgment(e.to_string()))?
    } else {
        ElicitationSession::new(id, req.model_hash.clone(), &model.hierarchy, req.mode)
    };
    let bytes = save_session(&session);
    state.store.insert_session(session).map_err(|f| ApiError::from_failure(StatusCode::INTERNAL_SERVER_ERROR, "io", f))?;
    Ok((StatusCode::CREATED, json_headers(), bytes).into_response())
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let cell = session_or_404(&state, &id)?;
    let s = cell.lock().expect("session lock");
    Ok(json_ok(save_session(&s)))
}

#[derive(Serialize)]
struct QuestionDoc {
    node: String,
    node_label: String,
    /// 1-based positions within the node's children.
    pair: [usize; 2],
    first: String,
    second: String,
    first_label: String,
    second_label: String,
    text: String,
}

#[derive(Serialize)]
struct NextDoc {
    session_id: String,
    answered: usize,
    total: usize,
    question: Option<QuestionDoc>,
}

async fn next_question(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let cell = session_or_404(&state, &id)?;
    let s = cell.lock().expect("session lock").clone();
    let model = model_or_404(&state, &s.model_hash)?;
    let h = &model.hierarchy;
    let label = |id: &str| h.node(id).map_or_else(|| id.to_string(), |n| n.label.clone());
    let question = s.next_question(h).map(|q| QuestionDoc {
        node_label: label(&q.node),
        pair: [q.pair.0 + 1, q.pair.1 + 1],
        first_label: label(&q.first),
        second_label: label(&q.second),
        node: q.node,
        first: q.first,
        second: q.second,
        text: q.text,
    });
    let total: usize = s.judgment_sets().iter().map(|j| j.total()).sum();
    let answered: usize = s.judgment_sets().iter().map(|j| j.answered_count()).sum();
    Ok(json_ok(to_pretty(&NextDoc { session_id: s.id.clone(), answered, total, question })))
}

/// A judgment as a number, a `"a/b"` string, or a verbal answer.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgmentBody {
    node: String,
    pair: [usize; 2],
    #[serde(default)]
    value: Option<RatioValue>,
    #[serde(default)]
    verbal: Option<VerbalJudgment>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RatioValue {
    Number(f64),
    Text(String),
}

#[derive(Serialize)]
struct JudgmentRecorded {
    node: String,
    pair: [usize; 2],
    value: f64,
    reciprocal: f64,
    progress: NodeProgress,
}

async fn submit_judgment(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let cell = session_or_404(&state, &id)?;
    let req: JudgmentBody = parse_body(&body)?;
    let value = match (req.value, req.verbal) {
        (Some(RatioValue::Number(v)), None) => v,
        (Some(RatioValue::Text(t)), None) => parse_ratio(&t).map_err(ApiError::invalid_judgment)?,
        (None, Some(v)) => ahp_core::verbal_to_value(v),
        _ => return Err(ApiError::bad_request("give exactly one of `value` and `verbal`")),
    };
    let [i, j] = req.pair;
    if i == 0 || j == 0 {
        return Err(ApiError::invalid_judgment("pairs are 1-based"));
    }
    let pair = (i - 1, j - 1);
    let mut s = cell.lock().expect("session lock");
    s.record_judgment(&req.node, pair, value).map_err(|e| match e {
        ElicitationError::UnknownNode(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_node", e.to_string()),
        e => ApiError::invalid_judgment(e.to_string()),
    })?;
    state.store.snapshot(&s).map_err(|f| ApiError::from_failure(StatusCode::INTERNAL_SERVER_ERROR, "io", f))?;
    let stored = s.judgment_set(&req.node).ok().and_then(|set| set.get(pair.0, pair.1)).unwrap_or(value);
    let status = s.status(&state.opts).map_err(|e| compute_error(e.into(), false))?;
    let progress = status.nodes.into_iter().find(|n| n.node == req.node).expect("node was just answered");
    let doc = JudgmentRecorded { node: req.node, pair: req.pair, value: stored, reciprocal: 1.0 / stored, progress };
    Ok(json_ok(to_pretty(&doc)))
}

async fn session_status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let cell = session_or_404(&state, &id)?;
    let s = cell.lock().expect("session lock").clone();
    let status = s.status(&state.opts).map_err(|e| compute_error(e.into(), false))?;
    let mut v = serde_json::to_value(&status).expect("status serializes");
    v["session_id"] = json!(s.id);
    v["model_hash"] = json!(s.model_hash);
    v["mode"] = json!(s.mode);
    Ok(json_ok(to_pretty(&v)))
}

fn session_and_model(state: &AppState, id: &str) -> Result<(ElicitationSession, Arc<Model>), ApiError> {
    let s = session_or_404(state, id)?.lock().expect("session lock").clone();
    let model = model_or_404(state, &s.model_hash)?;
    Ok((s, model))
}

async fn session_results(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let (s, model) = session_and_model(&state, &id)?;
    let bytes = ops::results_bytes(&model, Some(&s), &state.opts).map_err(|f| compute_error(f, !s.is_complete()))?;
    Ok(json_ok(bytes))
}

async fn session_sensitivity(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let (s, model) = session_and_model(&state, &id)?;
    let req: SensitivityRequest = parse_body(&body)?;
    let doc =
        ops::sensitivity_query(&model, Some(&s), &req, &state.opts).map_err(|f| compute_error(f, !s.is_complete()))?;
    Ok(json_ok(to_pretty(&doc)))
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(addr: &str, state: Arc<AppState>) -> Result<(), Failure> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

