//! HTTP/JSON API over one task model, for the browser authoring tool.
//!
//! | method | path              | body                                   |
//! |--------|-------------------|----------------------------------------|
//! | GET    | `/model`          |                                        |
//! | GET    | `/graph`          | `?format=dot` for DOT text             |
//! | GET    | `/validate`       |                                        |
//! | GET    | `/journal`        | mutations so far as an author script   |
//! | POST   | `/cnl/expansions` | `{pattern, slot}`                      |
//! | POST   | `/cnl/default`    | `{pattern}`                            |
//! | POST   | `/action`         | `{revision, sentence}`                 |
//! | POST   | `/plan`           | `{revision, mode, id?, name?}`         |
//! | POST   | `/link`           | `{revision, kind, from, to, order?}`   |
//! | POST   | `/draft`          | `{goal, languages}`                    |
//! | POST   | `/save`           | `{}`                                   |
//!
//! Mutations carry the revision the client last saw; a mismatch is a 409
//! and nothing changes. Malformed bodies are 400, unknown ids 404, and
//! other domain errors 422 with the core error code in `error`.

mod error;
mod session;

use std::sync::Arc;

use axum::extract::{FromRequest, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;
use tower_http::cors::CorsLayer;

use taskdraft_core::cnl::{Cnl, Pattern};
use taskdraft_core::graph::Graph;
use taskdraft_core::kb::{Actor, Decomposition, RelationKind};
use taskdraft_core::pipeline::draft;
use taskdraft_core::script::{Command, Outcome};
use taskdraft_core::{Language, TaskModel};

pub use error::ApiError;
pub use session::Session;

pub type SharedSession = Arc<RwLock<Session>>;

/// JSON body extractor that reports schema problems as 400.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let Json(value) = Json::<T>::from_request(req, state).await?;
        Ok(ApiJson(value))
    }
}

pub fn router(session: Session) -> Router {
    router_shared(Arc::new(RwLock::new(session)))
}

pub fn router_shared(state: SharedSession) -> Router {
    Router::new()
        .route("/model", get(get_model))
        .route("/graph", get(get_graph))
        .route("/validate", get(get_validate))
        .route("/journal", get(get_journal))
        .route("/cnl/expansions", post(post_expansions))
        .route("/cnl/default", post(post_default))
        .route("/action", post(post_action))
        .route("/plan", post(post_plan))
        .route("/link", post(post_link))
        .route("/draft", post(post_draft))
        .route("/save", post(post_save))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(session: Session, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(session)).await
}

type ApiResult = Result<Json<Value>, ApiError>;

fn snapshot(session: &Session) -> Value {
    let model = session.model();
    let cnl = Cnl::new(&session.grammar, model);
    let actions: Vec<Value> = model
        .actions()
        .map(|a| {
            json!({
                "id": a.id,
                "origin": a.origin.as_str(),
                "actor": a.complex.actor.as_str(),
                "system": matches!(a.complex.actor, Actor::Agent(_)),
                "sentence": cnl.render(&a.complex).ok(),
                "complex": a.complex,
            })
        })
        .collect();
    let plans: Vec<Value> = model
        .plans()
        .map(|p| json!({"id": p.id, "mode": p.decomposition.as_str(), "label": p.label}))
        .collect();
    let instances: Vec<Value> = model
        .instances()
        .map(|i| json!({"id": i.id, "concept": i.concept, "label": i.label, "origin": i.origin.as_str()}))
        .collect();
    json!({
        "revision": session.revision(),
        "actions": actions,
        "plans": plans,
        "edges": model.edges().collect::<Vec<_>>(),
        "instances": instances,
        "kb": model.to_text(),
    })
}

async fn get_model(State(state): State<SharedSession>) -> Json<Value> {
    Json(snapshot(&*state.read().await))
}

#[derive(Deserialize)]
struct GraphQuery {
    format: Option<String>,
}

async fn get_graph(State(state): State<SharedSession>, Query(q): Query<GraphQuery>) -> Result<Response, ApiError> {
    let session = state.read().await;
    let graph = Graph::of(session.model());
    match q.format.as_deref() {
        None | Some("json") => Ok(([(header::CONTENT_TYPE, "application/json")], graph.to_json()).into_response()),
        Some("dot") => Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], graph.to_dot()).into_response()),
        Some(other) => Err(ApiError::schema(format!("unknown graph format `{other}`"))),
    }
}

async fn get_validate(State(state): State<SharedSession>) -> Json<Value> {
    let session = state.read().await;
    let violations = session.model().validate();
    Json(json!({"revision": session.revision(), "valid": violations.is_empty(), "violations": violations}))
}

async fn get_journal(State(state): State<SharedSession>) -> Response {
    let text = state.read().await.journal().to_text();
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionsReq {
    pattern: String,
    slot: usize,
}

async fn post_expansions(State(state): State<SharedSession>, ApiJson(req): ApiJson<ExpansionsReq>) -> ApiResult {
    let session = state.read().await;
    let cnl = Cnl::new(&session.grammar, session.model());
    let pattern = Pattern::parse(&req.pattern, session.model())?;
    let expansions = cnl.expansions(&pattern, req.slot)?;
    Ok(Json(json!({
        "pattern": pattern.to_string(),
        "slot": req.slot,
        "expansions": expansions,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultReq {
    pattern: String,
}

async fn post_default(State(state): State<SharedSession>, ApiJson(req): ApiJson<DefaultReq>) -> ApiResult {
    let session = state.read().await;
    let cnl = Cnl::new(&session.grammar, session.model());
    let pattern = Pattern::parse(&req.pattern, session.model())?;
    let ground = cnl.default_completion(&pattern)?;
    Ok(Json(json!({
        "pattern": pattern.to_string(),
        "sentence": ground.to_string(),
        "complex": ground.complex,
    })))
}

fn check_revision(session: &Session, sent: u64) -> Result<(), ApiError> {
    if sent == session.revision() {
        Ok(())
    } else {
        Err(ApiError::stale(session.revision(), sent))
    }
}

#[derive(Serialize)]
struct MutationResponse {
    revision: u64,
    /// The script command that was applied, or null when nothing changed.
    delta: Option<String>,
    #[serde(flatten)]
    result: Value,
}

async fn mutate(state: &SharedSession, sent: u64, command: Command) -> ApiResult {
    let mut session = state.write().await;
    check_revision(&session, sent)?;
    let line = command.to_string();
    let before = session.revision();
    let outcome = session.mutate(command)?;
    let changed = session.revision() != before;
    let result = match outcome {
        Outcome::Action(a) => json!({"id": a.id, "duplicate": a.duplicate}),
        Outcome::Plan(id) => json!({"id": id}),
        Outcome::Link(edge) => json!({"edge": edge}),
    };
    Ok(Json(
        serde_json::to_value(MutationResponse {
            revision: session.revision(),
            delta: changed.then_some(line),
            result,
        })
        .expect("response serializes"),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionReq {
    revision: u64,
    sentence: String,
}

async fn post_action(State(state): State<SharedSession>, ApiJson(req): ApiJson<ActionReq>) -> ApiResult {
    let sentence = req.sentence.split_whitespace().collect::<Vec<_>>().join(" ");
    mutate(&state, req.revision, Command::Action { sentence }).await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanReq {
    revision: u64,
    mode: String,
    /// Requested id; otherwise one is made from `name`.
    id: Option<String>,
    name: Option<String>,
}

async fn post_plan(State(state): State<SharedSession>, ApiJson(req): ApiJson<PlanReq>) -> ApiResult {
    let mode = Decomposition::parse(&req.mode)
        .ok_or_else(|| ApiError::schema(format!("mode must be `sequence` or `choice`, not `{}`", req.mode)))?;
    let session = state.write().await;
    check_revision(&session, req.revision)?;
    // The script form names the id the plan receives. An explicit id is used
    // as given (and refused if taken); otherwise pick one as `add_plan` would.
    let id = match req.id.clone() {
        Some(id) => id,
        None => {
            let base = req
                .name
                .as_deref()
                .map(taskdraft_core::ids::slugify)
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "plan".into());
            taskdraft_core::ids::unique_slug(&base, |s| session.model().id_taken(s))
        }
    };
    drop(session);
    mutate(
        &state,
        req.revision,
        Command::Plan {
            id,
            mode,
            label: req.name,
        },
    )
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkReq {
    revision: u64,
    kind: String,
    from: String,
    to: String,
    order: Option<u32>,
}

async fn post_link(State(state): State<SharedSession>, ApiJson(req): ApiJson<LinkReq>) -> ApiResult {
    let kind = RelationKind::parse(&req.kind)
        .ok_or_else(|| ApiError::schema(format!("unknown relation kind `{}`", req.kind)))?;
    mutate(
        &state,
        req.revision,
        Command::Link {
            kind,
            from: req.from,
            to: req.to,
            order: req.order,
        },
    )
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DraftReq {
    goal: String,
    languages: Vec<String>,
}

async fn post_draft(State(state): State<SharedSession>, ApiJson(req): ApiJson<DraftReq>) -> ApiResult {
    if req.languages.is_empty() {
        return Err(ApiError::schema("languages must not be empty"));
    }
    let session = state.read().await;
    let languages: Vec<Language> = req.languages.iter().map(Language::new).collect();
    let docs = draft(session.model(), &req.goal, &languages, &session.lexicons)?;
    Ok(Json(json!({
        "revision": session.revision(),
        "goal": req.goal,
        "drafts": docs,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SaveReq {}

async fn post_save(State(state): State<SharedSession>, ApiJson(_): ApiJson<SaveReq>) -> ApiResult {
    let session = state.read().await;
    let path = session.save_path.clone().ok_or_else(|| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "no-save-path",
            "server was started without a model file",
        )
    })?;
    std::fs::write(&path, session.model().to_text())
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "write-failed", e.to_string()))?;
    Ok(Json(json!({"revision": session.revision(), "path": path})))
}

/// Replays a journal against a model: what the API did, as a pure function.
pub fn replay(initial: &TaskModel, session: &Session) -> Result<TaskModel, taskdraft_core::ScriptError> {
    session.journal().apply(initial, &session.grammar).map(|(m, _)| m)
}
