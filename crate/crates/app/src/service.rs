//! HTTP play service.
//!
//! Public riddle views carry the id, genre and clue surfaces only. The
//! intended answer and the answer set are released through `reveal`, or
//! through `answers` once the caller's session has been revealed.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use riddler::eval::{run_case_study, AnswerNormalizer, CaseStudyOptions, EvalError};
use riddler::generator::{derive_seed, generate_riddle, GeneratorConfig, Genre, Riddle};
use riddler::knowledge::{ConceptId, KnowledgeBase};
use riddler::validator::{ambiguity_stats, check_guess, GuessPolicy, GuessVerdict};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::backend::{build_client, BackendKind, MockMode};
use crate::store::{RiddleStore, StoreError, StoredRecord};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Wrong guesses allowed before a session is revealed automatically.
    pub max_guesses: usize,
    /// Allows `GET /riddles/{id}?debug=true` to return the full riddle.
    pub debug: bool,
    pub generator: GeneratorConfig,
    pub normalizer: AnswerNormalizer,
    pub policy: GuessPolicy,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            max_guesses: 5,
            debug: false,
            generator: GeneratorConfig::default(),
            normalizer: AnswerNormalizer::bundled(),
            policy: GuessPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuessRecord {
    /// The guess after normalization; repeats are matched on this.
    pub text: String,
    pub verdict: GuessVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaySession {
    pub session_id: String,
    pub riddle_id: String,
    pub guesses: Vec<GuessRecord>,
    pub wrong_count: usize,
    pub revealed: bool,
}

pub struct AppState {
    kb: Arc<KnowledgeBase>,
    config: ServiceConfig,
    store: Mutex<RiddleStore>,
    sessions: Mutex<HashMap<String, PlaySession>>,
}

impl AppState {
    /// Brings stale records up to date with `kb` before serving them.
    pub fn new(kb: KnowledgeBase, mut store: RiddleStore, config: ServiceConfig) -> Result<Self, StoreError> {
        store.refresh(&kb)?;
        Ok(Self { kb: Arc::new(kb), config, store: Mutex::new(store), sessions: Mutex::new(HashMap::new()) })
    }

    fn store(&self) -> MutexGuard<'_, RiddleStore> {
        self.store.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn sessions(&self) -> MutexGuard<'_, HashMap<String, PlaySession>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn session(&self, id: &str) -> Option<PlaySession> {
        self.sessions().get(id).cloned()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    details: Option<serde_json::Value>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), details: None }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message });
        if let Some(details) = self.details {
            body["details"] = details;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::NotFound(_) | StoreError::InvalidId(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize)]
struct PublicRiddle {
    id: String,
    genre: Genre,
    clues: Vec<String>,
}

impl From<&Riddle> for PublicRiddle {
    fn from(r: &Riddle) -> Self {
        Self { id: r.id.clone(), genre: r.genre, clues: r.clues.iter().map(|c| c.surface.clone()).collect() }
    }
}

#[derive(Debug, Serialize)]
struct Solution {
    intended: ConceptId,
    answers: Vec<ConceptId>,
}

impl From<&StoredRecord> for Solution {
    fn from(r: &StoredRecord) -> Self {
        Self { intended: r.riddle.intended.clone(), answers: r.answers.iter().cloned().collect() }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/riddles", post(create_riddle))
        .route("/riddles/{id}", get(get_riddle))
        .route("/riddles/{id}/guess", post(guess))
        .route("/riddles/{id}/reveal", post(reveal))
        .route("/riddles/{id}/answers", get(answers))
        .route("/stats/ambiguity", get(stats))
        .route("/eval/run", post(eval_run))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    concept: Option<String>,
    genre: String,
    seed: Option<u64>,
}

async fn create_riddle(
    State(state): State<Arc<AppState>>,
    Json(req): Json<CreateRequest>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let genre: Genre = req
        .genre
        .parse()
        .map_err(|e: riddler::generator::GeneratorError| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let seed = req.seed.unwrap_or_else(|| uuid::Uuid::new_v4().as_u64_pair().0);
    let kb = &state.kb;
    let concept = match &req.concept {
        Some(raw) => kb.concept(raw).map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e.to_string()))?,
        None => {
            let pick = derive_seed(seed, &["concept"]) % kb.concept_count() as u64;
            kb.concepts().nth(pick as usize).expect("index below concept count").clone()
        }
    };
    let riddle = generate_riddle(kb, &concept, genre, &state.config.generator, seed)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    {
        let mut store = state.store();
        if !store.contains(&riddle.id) {
            store.insert(kb, riddle.clone())?;
        }
    }
    let session_id = uuid::Uuid::new_v4().to_string();
    state.sessions().insert(
        session_id.clone(),
        PlaySession {
            session_id: session_id.clone(),
            riddle_id: riddle.id.clone(),
            guesses: vec![],
            wrong_count: 0,
            revealed: false,
        },
    );
    let mut body = serde_json::to_value(PublicRiddle::from(&riddle)).expect("view serializes");
    body["session_id"] = json!(session_id);
    Ok((StatusCode::CREATED, Json(body)))
}

#[derive(Debug, Default, Deserialize)]
struct DebugQuery {
    #[serde(default)]
    debug: bool,
}

async fn get_riddle(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<DebugQuery>,
) -> ApiResult<Json<serde_json::Value>> {
    let record = state.store().load(&id)?;
    if q.debug {
        if !state.config.debug {
            return Err(ApiError::new(StatusCode::FORBIDDEN, "debug views are disabled"));
        }
        return Ok(Json(serde_json::to_value(&record.riddle).expect("riddle serializes")));
    }
    Ok(Json(serde_json::to_value(PublicRiddle::from(&record.riddle)).expect("view serializes")))
}

/// Looks up a session and checks it belongs to riddle `id`.
fn session_for(state: &AppState, session_id: &str, id: &str) -> ApiResult<PlaySession> {
    let session = state
        .session(session_id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session {session_id}")))?;
    if session.riddle_id != id {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "session belongs to a different riddle"));
    }
    Ok(session)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GuessRequest {
    session_id: String,
    text: String,
}

#[derive(Debug, Serialize)]
struct GuessResponse {
    verdict: GuessVerdict,
    wrong_count: usize,
    revealed: bool,
}

async fn guess(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<GuessRequest>,
) -> ApiResult<Json<GuessResponse>> {
    session_for(&state, &req.session_id, &id)?;
    let token = state
        .config
        .normalizer
        .normalize(&req.text)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    let record = state.store().load(&id)?;

    let mut sessions = state.sessions();
    let session = sessions.get_mut(&req.session_id).expect("session checked above");
    if let Some(previous) = session.guesses.iter().find(|g| g.text == token) {
        return Ok(Json(GuessResponse {
            verdict: previous.verdict,
            wrong_count: session.wrong_count,
            revealed: session.revealed,
        }));
    }
    if session.revealed {
        return Err(ApiError::new(StatusCode::CONFLICT, "the answers have been revealed; start a new riddle"));
    }
    let verdict = check_guess(&state.kb, &record.answer_set(), &token, &state.config.normalizer, state.config.policy)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
    session.guesses.push(GuessRecord { text: token, verdict });
    if verdict == GuessVerdict::Invalid {
        session.wrong_count += 1;
        if session.wrong_count >= state.config.max_guesses {
            session.revealed = true;
        }
    }
    Ok(Json(GuessResponse { verdict, wrong_count: session.wrong_count, revealed: session.revealed }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RevealRequest {
    session_id: Option<String>,
}

async fn reveal(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<RevealRequest>>,
) -> ApiResult<Json<Solution>> {
    let record = state.store().load(&id)?;
    if let Some(session_id) = body.and_then(|Json(b)| b.session_id) {
        session_for(&state, &session_id, &id)?;
        if let Some(s) = state.sessions().get_mut(&session_id) {
            s.revealed = true;
        }
    }
    Ok(Json(Solution::from(&record)))
}

#[derive(Debug, Deserialize)]
struct AnswersQuery {
    session_id: Option<String>,
}

async fn answers(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<AnswersQuery>,
) -> ApiResult<Json<Solution>> {
    let record = state.store().load(&id)?;
    let revealed = match &q.session_id {
        Some(sid) => session_for(&state, sid, &id)?.revealed,
        None => false,
    };
    if !revealed {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "answers are available after reveal"));
    }
    Ok(Json(Solution::from(&record)))
}

async fn stats(State(state): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let records = state.store().load_all()?;
    let riddles: Vec<Riddle> = records.iter().map(|r| r.riddle.clone()).collect();
    let sets: Vec<_> = records.iter().map(StoredRecord::answer_set).collect();
    let stats =
        ambiguity_stats(&riddles, &sets).map_err(|_| ApiError::new(StatusCode::NOT_FOUND, "no riddles stored yet"))?;
    Ok(Json(serde_json::to_value(stats).expect("stats serialize")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalRequest {
    backend: BackendKind,
    fixture: Option<PathBuf>,
    #[serde(default)]
    mock_mode: MockMode,
}

/// Evaluates every stored riddle with the requested backend.
async fn eval_run(
    State(state): State<Arc<AppState>>,
    Json(req): Json<EvalRequest>,
) -> ApiResult<Json<serde_json::Value>> {
    let records = state.store().load_all()?;
    if records.is_empty() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "no riddles stored yet"));
    }
    let kb = Arc::clone(&state.kb);
    let normalizer = state.config.normalizer.clone();
    // Solver backends block (the live one does network I/O).
    let outcome = tokio::task::spawn_blocking(move || {
        let riddles: Vec<Riddle> = records.iter().map(|r| r.riddle.clone()).collect();
        let sets: Vec<_> = records.iter().map(StoredRecord::answer_set).collect();
        let client = build_client(req.backend, req.mock_mode, req.fixture.as_deref(), &sets)
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))?;
        let options = CaseStudyOptions { normalizer, ..CaseStudyOptions::default() };
        run_case_study(&kb, &riddles, client.as_ref(), &options).map_err(|e| match e {
            EvalError::SolverUnavailable { cause, partial } => ApiError {
                status: StatusCode::BAD_GATEWAY,
                message: cause.to_string(),
                details: Some(serde_json::to_value(&*partial).expect("report serializes")),
            },
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, other.to_string()),
        })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(serde_json::to_value(outcome).expect("report serializes")))
}
