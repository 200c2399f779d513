//! JSON API for live teaching sessions and object previews.
//!
//! Sessions are event-sourced: the event log is the durable state and
//! replays to the same knowledge base. Writes to one session are
//! serialized; sessions are independent of each other.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::geometry::{load_cloud, CloudFormat, PointCloud};
use crate::learner::KnowledgeBase;
use crate::pipeline::{object_views, plan_grasp};
use crate::projection::ProjectionMode;
use crate::protocol::{sliding_accuracy, timeline_metrics, Dataset, Event, Metrics};
use crate::representation::FeatureVector;
use crate::view_selection::{rank_views_with, view_entropy_with};

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn not_found(what: &str, id: &str) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            code: "not_found",
            message: format!("unknown {what} `{id}`"),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "invalid_argument",
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "invalid_argument"),
            Error::NoKnowledge => (StatusCode::CONFLICT, "no_knowledge"),
            Error::UnknownCategory(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unknown_category"),
            Error::NoValidGrasp(_) => (StatusCode::UNPROCESSABLE_ENTITY, "no_valid_grasp"),
            _ => (StatusCode::UNPROCESSABLE_ENTITY, "data_error"),
        };
        ApiError {
            status,
            code,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "code": self.code, "message": self.message })),
        )
            .into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> std::result::Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("request body: {e}")))
}

/// Instances a session can refer to by id.
#[derive(Debug, Default)]
struct Catalog {
    by_id: BTreeMap<String, (String, FeatureVector)>,
}

impl Catalog {
    fn from_dataset(data: &Dataset) -> Self {
        let mut by_id = BTreeMap::new();
        for label in data.labels() {
            for inst in data.instances(label) {
                by_id.insert(inst.id.clone(), (label.to_string(), inst.feature.clone()));
            }
        }
        Catalog { by_id }
    }

    fn get(&self, id: &str) -> std::result::Result<&(String, FeatureVector), ApiError> {
        self.by_id
            .get(id)
            .ok_or_else(|| ApiError::not_found("instance", id))
    }
}

#[derive(Debug, Clone)]
struct Session {
    id: String,
    kb: KnowledgeBase,
    events: Vec<Event>,
    /// Ask outcomes since the last teach.
    results: Vec<bool>,
    checks: Vec<f64>,
    iteration: usize,
    last_prediction: Option<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryCount {
    pub label: String,
    pub n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub categories: Vec<CategoryCount>,
    pub total: u64,
    pub window_accuracy: Option<f64>,
    pub metrics: Metrics,
    pub digest: String,
    pub events: Vec<Event>,
    pub last_prediction: Option<Value>,
}

impl Session {
    fn new(id: String, smoothing: f64) -> Result<Self> {
        Ok(Session {
            id,
            kb: KnowledgeBase::new(smoothing)?,
            events: Vec::new(),
            results: Vec::new(),
            checks: Vec::new(),
            iteration: 0,
            last_prediction: None,
        })
    }

    fn window_accuracy(&self, window_factor: usize) -> Option<f64> {
        sliding_accuracy(&self.results, self.kb.len().max(1), window_factor)
    }

    fn state(&self, window_factor: usize) -> SessionState {
        SessionState {
            id: self.id.clone(),
            categories: self
                .kb
                .categories()
                .map(|c| CategoryCount {
                    label: c.label.clone(),
                    n: c.n,
                })
                .collect(),
            total: self.kb.total(),
            window_accuracy: self.window_accuracy(window_factor),
            metrics: timeline_metrics(&self.events, &self.checks),
            digest: self.kb.digest(),
            events: self.events.clone(),
            last_prediction: self.last_prediction.clone(),
        }
    }
}

/// Rebuilds a knowledge base from an event log.
pub fn replay(events: &[Event], data: &Dataset, smoothing: f64) -> Result<KnowledgeBase> {
    let catalog = Catalog::from_dataset(data);
    let feature = |id: &str| {
        catalog
            .by_id
            .get(id)
            .map(|e| e.1.clone())
            .ok_or_else(|| Error::Format(format!("event refers to unknown instance `{id}`")))
    };
    let mut kb = KnowledgeBase::new(smoothing)?;
    for e in events {
        match e {
            Event::Teach {
                label, instances, ..
            } => {
                let feats = instances
                    .iter()
                    .map(|i| feature(i))
                    .collect::<Result<Vec<_>>>()?;
                kb.teach(label, &feats)?;
            }
            Event::Correct {
                label, instance, ..
            } => kb.correct(label, &feature(instance)?)?,
            Event::Ask { .. } => {}
        }
    }
    Ok(kb)
}

struct Shared {
    settings: Settings,
    dataset: Dataset,
    catalog: Catalog,
    objects: BTreeMap<String, PointCloud>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

#[derive(Clone)]
pub struct AppState {
    shared: Arc<Shared>,
}

impl AppState {
    pub fn new(
        settings: Settings,
        dataset: Dataset,
        objects: BTreeMap<String, PointCloud>,
    ) -> Self {
        AppState {
            shared: Arc::new(Shared {
                catalog: Catalog::from_dataset(&dataset),
                settings,
                dataset,
                objects,
                sessions: RwLock::new(HashMap::new()),
                next_id: AtomicU64::new(1),
            }),
        }
    }

    /// Loads the dataset and object directories named in `settings.server`.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        let dataset = match &settings.server.dataset {
            Some(dir) => Dataset::load_dir(dir, &settings.descriptor)?,
            None => Dataset::new(),
        };
        let objects = match &settings.server.objects {
            Some(dir) => load_objects(dir)?,
            None => BTreeMap::new(),
        };
        Ok(AppState::new(settings.clone(), dataset, objects))
    }

    pub fn dataset(&self) -> &Dataset {
        &self.shared.dataset
    }

    fn session(&self, id: &str) -> std::result::Result<Arc<Mutex<Session>>, ApiError> {
        self.shared
            .sessions
            .read()
            .expect("session table")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn window_factor(&self) -> usize {
        self.shared.settings.protocol.window_factor
    }

    fn object(&self, id: &str) -> std::result::Result<&PointCloud, ApiError> {
        self.shared
            .objects
            .get(id)
            .ok_or_else(|| ApiError::not_found("object", id))
    }
}

fn load_objects(dir: &Path) -> Result<BTreeMap<String, PointCloud>> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if let Some(format) = CloudFormat::from_path(&path) {
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.insert(id, load_cloud(&path, format)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct TeachRequest {
    label: String,
    instance_ids: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct AskRequest {
    instance_id: String,
}

#[derive(Debug, Deserialize)]
struct CorrectRequest {
    label: String,
    instance_id: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct GraspRequest {
    seed: Option<u64>,
    budget: Option<usize>,
}

async fn create_session(
    State(app): State<AppState>,
) -> std::result::Result<(StatusCode, Json<SessionState>), ApiError> {
    let n = app.shared.next_id.fetch_add(1, Ordering::Relaxed);
    let id = format!("s{n}");
    let session = Session::new(id.clone(), app.shared.settings.smoothing)?;
    let state = session.state(app.window_factor());
    app.shared
        .sessions
        .write()
        .expect("session table")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(state)))
}

async fn get_session(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<SessionState> {
    let s = app.session(&id)?;
    let s = s.lock().await;
    Ok(Json(s.state(app.window_factor())))
}

async fn teach(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<SessionState> {
    let req: TeachRequest = parse_body(&body)?;
    let s = app.session(&id)?;
    let mut s = s.lock().await;
    let feats = req
        .instance_ids
        .iter()
        .map(|i| app.shared.catalog.get(i).map(|e| e.1.clone()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    s.kb.teach(&req.label, &feats)?;
    let iteration = s.iteration;
    s.events.push(Event::Teach {
        iteration,
        label: req.label,
        instances: req.instance_ids,
    });
    s.results.clear();
    Ok(Json(s.state(app.window_factor())))
}

async fn ask(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Value> {
    let req: AskRequest = parse_body(&body)?;
    let s = app.session(&id)?;
    let mut s = s.lock().await;
    let (truth, feature) = app.shared.catalog.get(&req.instance_id)?;
    let prediction = s.kb.classify(feature)?;
    let correct = &prediction.label == truth;
    s.iteration += 1;
    let iteration = s.iteration;
    s.events.push(Event::Ask {
        iteration,
        label: truth.clone(),
        instance: req.instance_id.clone(),
        predicted: prediction.label.clone(),
        correct,
    });
    s.results.push(correct);
    let wf = app.window_factor();
    let window = s.window_accuracy(wf);
    if s.results.len() >= s.kb.len() {
        if let Some(acc) = window {
            s.checks.push(acc);
        }
    }
    let tau = app.shared.settings.protocol.tau;
    let response = json!({
        "instance_id": req.instance_id,
        "prediction": prediction,
        "correct": correct,
        "window_accuracy": window,
        "ready_for_new_category": s.results.len() >= s.kb.len() && window.is_some_and(|a| a > tau),
    });
    s.last_prediction = Some(response.clone());
    Ok(Json(response))
}

async fn correct(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<SessionState> {
    let req: CorrectRequest = parse_body(&body)?;
    let s = app.session(&id)?;
    let mut s = s.lock().await;
    let (_, feature) = app.shared.catalog.get(&req.instance_id)?;
    s.kb.correct(&req.label, feature)?;
    let iteration = s.iteration;
    s.events.push(Event::Correct {
        iteration,
        label: req.label,
        instance: req.instance_id,
    });
    Ok(Json(s.state(app.window_factor())))
}

async fn metrics(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Value> {
    let s = app.session(&id)?;
    let s = s.lock().await;
    Ok(Json(json!({
        "metrics": timeline_metrics(&s.events, &s.checks),
        "window_accuracy": s.window_accuracy(app.window_factor()),
        "categories": s.kb.len(),
        "total": s.kb.total(),
    })))
}

async fn list_objects(State(app): State<AppState>) -> Json<Value> {
    let objects: Vec<Value> = app
        .shared
        .objects
        .iter()
        .map(|(id, c)| json!({ "id": id, "points": c.len(), "normals": c.normals().is_some() }))
        .collect();
    Json(json!({ "objects": objects }))
}

async fn object_views_handler(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Value> {
    let cloud = app.object(&id)?.clone();
    let settings = app.shared.settings.clone();
    let payload = tokio::task::spawn_blocking(move || -> Result<Value> {
        let g = &settings.grasp;
        let rendered = object_views(&cloud, &g.setup, ProjectionMode::FixedSize, g.bins)?;
        let ranking = rank_views_with(&rendered.views, g.entropy)?;
        let views = rendered
            .views
            .iter()
            .enumerate()
            .map(|(i, v)| {
                Ok(json!({
                    "index": i,
                    "entropy_bits": view_entropy_with(v, g.entropy)?,
                    "plane_side": v.plane_side,
                    "mode": v.mode,
                    "depth": v.grid.to_rows(),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(json!({ "object": id, "views": views, "ranking": ranking }))
    })
    .await
    .map_err(|e| ApiError::bad_request(format!("worker failed: {e}")))??;
    Ok(Json(payload))
}

async fn object_grasp(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Value> {
    let req: GraspRequest = if body.is_empty() {
        GraspRequest::default()
    } else {
        parse_body(&body)?
    };
    let cloud = app.object(&id)?.clone();
    let mut config = app.shared.settings.grasp;
    config.seed = req.seed.unwrap_or(app.shared.settings.seed);
    if let Some(b) = req.budget {
        config.budget = b;
    }
    let payload = tokio::task::spawn_blocking(move || -> Result<Value> {
        let plan = plan_grasp(&cloud, &config)?;
        let best = *plan.best()?;
        Ok(json!({
            "object": id,
            "seed": config.seed,
            "budget": config.budget,
            "view_index": plan.view_index,
            "ranking": plan.ranking,
            "map": {
                "quality": plan.synthesis.map.quality.to_rows(),
                "rotation": plan.synthesis.map.rotation.to_rows(),
                "width": plan.synthesis.map.width.to_rows(),
            },
            "best": best.candidate,
            "pose": {
                "position": [best.pose.position.x, best.pose.position.y, best.pose.position.z],
                "closing_axis": best.pose.closing_axis().as_slice(),
                "approach_axis": best.pose.approach_axis().as_slice(),
                "width": best.pose.width,
            },
            "table_height": plan.table_height,
        }))
    })
    .await
    .map_err(|e| ApiError::bad_request(format!("worker failed: {e}")))??;
    Ok(Json(payload))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/teach", post(teach))
        .route("/sessions/{id}/ask", post(ask))
        .route("/sessions/{id}/correct", post(correct))
        .route("/sessions/{id}/metrics", get(metrics))
        .route("/objects", get(list_objects))
        .route("/objects/{id}/views", get(object_views_handler))
        .route("/objects/{id}/grasp", post(object_grasp))
        .with_state(state)
}

pub async fn serve(state: AppState, addr: SocketAddr) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Format(format!("bind {addr}: {e}")))?;
    log::info!("listening on {addr}");
    axum::serve(listener, router(state))
        .await
        .map_err(|e| Error::Format(format!("server: {e}")))
}
