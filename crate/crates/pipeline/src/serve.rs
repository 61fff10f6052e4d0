//! HTTP API over a loaded corpus. Runs are keyed by a digest of their inputs
//! and computed once on the blocking pool.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ppkg_core::cluster::{
    annotate_clusters, cluster_points, lda_cluster, node_documents, ClusterMethod, ClusterParams,
};
use ppkg_core::dimred::{project, DrMethod, TsneParams, UmapParams};
use ppkg_core::embed::{spring_layout, EmbeddingMatrix, LayoutParams};
use ppkg_core::graph::{degree_summary, export_graph_json, parse_graphml, PolicyGraph};
use ppkg_core::render::render_scatter;
use ppkg_core::validate::{evaluate, MetricValue};
use serde::Serialize;
use serde_json::{json, Value};

use crate::run::policy_id;
use crate::{sha256_hex, PipelineError, RunConfig};

struct LoadedPolicy {
    graph: PolicyGraph,
    export: Vec<u8>,
    embedding: Option<EmbeddingMatrix>,
}

#[derive(Debug, Clone, Serialize)]
struct RunRequest {
    policy: String,
    dr: DrMethod,
    clustering: ClusterMethod,
    params: ClusterParams,
    tsne: TsneParams,
    umap: UmapParams,
    layout: LayoutParams,
    top_terms: usize,
    seed: u64,
}

impl RunRequest {
    fn run_id(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("request serializes"))
    }
}

#[derive(Debug, Serialize)]
struct RunResult {
    node_ids: Vec<String>,
    positions: Vec<[f64; 2]>,
    labels: Vec<i32>,
    metrics: MetricValue,
    annotations: BTreeMap<i32, Vec<String>>,
    #[serde(skip)]
    svg: Vec<u8>,
}

enum RunState {
    Pending,
    Done(Arc<RunResult>),
    Failed(String),
}

pub struct AppState {
    config: RunConfig,
    policies: BTreeMap<String, LoadedPolicy>,
    runs: RwLock<HashMap<String, Arc<Mutex<RunState>>>>,
}

impl AppState {
    /// Parses and lays out every input. Unreadable files are logged and left
    /// out; it is an error if none load.
    pub fn load(config: RunConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let mut policies = BTreeMap::new();
        for path in config.resolve_inputs()? {
            let graph = match std::fs::read(&path).map_err(|e| e.to_string()).and_then(|b| parse_graphml(&b).map_err(|e| e.to_string())) {
                Ok(g) => g,
                Err(e) => {
                    log::error!("{}: {e}", path.display());
                    continue;
                }
            };
            let embedding = spring_layout(&graph, &config.layout).ok();
            let export = export_graph_json(&graph, &degree_summary(&graph));
            policies.insert(policy_id(&path), LoadedPolicy { graph, export, embedding });
        }
        if policies.is_empty() {
            return Err(PipelineError::NoValidInputs);
        }
        Ok(Self { config, policies, runs: RwLock::new(HashMap::new()) })
    }
}

fn error(status: StatusCode, message: impl Into<String>, field: Option<&str>) -> Response {
    let mut body = json!({ "error": message.into() });
    if let Some(f) = field {
        body["field"] = json!(f);
    }
    (status, Json(body)).into_response()
}

fn unprocessable(field: &str, message: impl Into<String>) -> Response {
    error(StatusCode::UNPROCESSABLE_ENTITY, message, Some(field))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/policies", get(list_policies))
        .route("/api/policies/{id}/graph", get(policy_graph))
        .route("/api/policies/{id}/run", post(submit_run))
        .route("/api/runs/{id}", get(run_status))
        .route("/api/runs/{id}/svg", get(run_svg))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: RunConfig, bind: &str) -> Result<(), PipelineError> {
    let state = Arc::new(AppState::load(config)?);
    let listener =
        tokio::net::TcpListener::bind(bind).await.map_err(|e| PipelineError::Bind(bind.to_string(), e.to_string()))?;
    log::info!("listening on {bind}");
    axum::serve(listener, router(state)).await.map_err(|e| PipelineError::Bind(bind.to_string(), e.to_string()))
}

async fn list_policies(State(state): State<Arc<AppState>>) -> Json<Value> {
    let list: Vec<Value> = state
        .policies
        .iter()
        .map(|(id, p)| json!({ "id": id, "node_count": p.graph.node_count(), "edge_count": p.graph.edge_count() }))
        .collect();
    Json(Value::Array(list))
}

async fn policy_graph(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match state.policies.get(&id) {
        Some(p) => ([(header::CONTENT_TYPE, "application/json")], p.export.clone()).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown policy {id:?}"), None),
    }
}

const BODY_FIELDS: [&str; 7] = ["dr", "clustering", "params", "seed", "tsne", "umap", "layout"];

fn parse_request(policy: &str, body: &[u8], c: &RunConfig) -> Result<RunRequest, Response> {
    let v: Value = serde_json::from_slice(body).map_err(|e| unprocessable("body", e.to_string()))?;
    let Value::Object(obj) = &v else {
        return Err(unprocessable("body", "expected a JSON object"));
    };
    if let Some(k) = obj.keys().find(|k| !BODY_FIELDS.contains(&k.as_str())) {
        return Err(unprocessable(k, format!("unknown field {k:?}")));
    }
    let tag = |field: &str| -> Result<&str, Response> {
        obj.get(field).and_then(Value::as_str).ok_or_else(|| unprocessable(field, format!("{field} must be a method tag")))
    };
    let dr_tag = tag("dr")?;
    let dr = DrMethod::from_tag(dr_tag).ok_or_else(|| unprocessable("dr", format!("unknown dr method {dr_tag:?}")))?;
    let cl_tag = tag("clustering")?;
    let clustering = ClusterMethod::from_tag(cl_tag)
        .ok_or_else(|| unprocessable("clustering", format!("unknown clustering method {cl_tag:?}")))?;
    let seed = obj
        .get("seed")
        .and_then(Value::as_u64)
        .ok_or_else(|| unprocessable("seed", "seed must be a non-negative integer"))?;

    fn block<T: serde::de::DeserializeOwned>(obj: &serde_json::Map<String, Value>, field: &str, default: &T) -> Result<T, Response>
    where
        T: Clone,
    {
        match obj.get(field) {
            None => Ok(default.clone()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| unprocessable(field, e.to_string())),
        }
    }
    let mut params: ClusterParams = block(obj, "params", &c.cluster_params)?;
    let mut tsne: TsneParams = block(obj, "tsne", &c.tsne)?;
    let mut umap: UmapParams = block(obj, "umap", &c.umap)?;
    params.seed = seed;
    tsne.seed = seed;
    umap.seed = seed;
    params.validate().map_err(|e| unprocessable("params", e.to_string()))?;

    if let Some(raw) = obj.get("layout") {
        let mut layout: LayoutParams = serde_json::from_value(raw.clone()).map_err(|e| unprocessable("layout", e.to_string()))?;
        if raw.get("seed").is_none() {
            layout.seed = c.layout.seed;
        }
        if layout != c.layout {
            return Err(error(StatusCode::CONFLICT, "layout differs from the served configuration", Some("layout")));
        }
    }
    Ok(RunRequest {
        policy: policy.to_string(),
        dr,
        clustering,
        params,
        tsne,
        umap,
        layout: c.layout.clone(),
        top_terms: c.top_terms,
        seed,
    })
}

fn compute(p: &LoadedPolicy, req: &RunRequest) -> Result<RunResult, String> {
    let embedding = p.embedding.as_ref().ok_or("policy has no layout (empty graph)")?;
    let y = project(embedding, req.dr, &req.tsne, &req.umap).map_err(|e| e.to_string())?;
    let assignment = if req.clustering == ClusterMethod::Lda {
        lda_cluster(&node_documents(&p.graph), &req.params).map(|o| o.assignment)
    } else {
        cluster_points(req.clustering, y.points(), &req.params)
    }
    .map_err(|e| e.to_string())?;
    let annotations = annotate_clusters(&assignment, &p.graph, req.top_terms).map_err(|e| e.to_string())?;
    let metrics = evaluate(y.points(), assignment.labels()).map_err(|e| e.to_string())?;
    let svg = render_scatter(y.points(), assignment.labels(), &annotations);
    Ok(RunResult {
        node_ids: y.node_order().to_vec(),
        positions: y.points().rows().map(|r| [r[0], r[1]]).collect(),
        labels: assignment.labels().to_vec(),
        metrics,
        annotations,
        svg,
    })
}

async fn submit_run(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Response {
    if !state.policies.contains_key(&id) {
        return error(StatusCode::NOT_FOUND, format!("unknown policy {id:?}"), None);
    }
    let req = match parse_request(&id, &body, &state.config) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let run_id = req.run_id();
    let slot = {
        let mut runs = state.runs.write().expect("run registry poisoned");
        if runs.contains_key(&run_id) {
            return Json(json!({ "run_id": run_id })).into_response();
        }
        let slot = Arc::new(Mutex::new(RunState::Pending));
        runs.insert(run_id.clone(), slot.clone());
        slot
    };
    let worker_state = state.clone();
    tokio::task::spawn_blocking(move || {
        let policy = &worker_state.policies[&req.policy];
        let outcome = match compute(policy, &req) {
            Ok(r) => RunState::Done(Arc::new(r)),
            Err(e) => RunState::Failed(e),
        };
        *slot.lock().expect("run slot poisoned") = outcome;
    });
    (StatusCode::ACCEPTED, Json(json!({ "run_id": run_id }))).into_response()
}

enum Lookup {
    Missing,
    Pending,
    Failed(String),
    Done(Arc<RunResult>),
}

fn lookup(state: &AppState, id: &str) -> Lookup {
    let runs = state.runs.read().expect("run registry poisoned");
    let Some(slot) = runs.get(id) else { return Lookup::Missing };
    let guard = slot.lock().expect("run slot poisoned");
    match &*guard {
        RunState::Pending => Lookup::Pending,
        RunState::Failed(e) => Lookup::Failed(e.clone()),
        RunState::Done(r) => Lookup::Done(r.clone()),
    }
}

async fn run_status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match lookup(&state, &id) {
        Lookup::Missing => error(StatusCode::NOT_FOUND, format!("unknown run {id:?}"), None),
        Lookup::Pending => Json(json!({ "status": "pending" })).into_response(),
        Lookup::Failed(e) => Json(json!({ "status": "failed", "error": e })).into_response(),
        Lookup::Done(r) => {
            let mut body = serde_json::to_value(&*r).expect("result serializes");
            body["status"] = json!("done");
            Json(body).into_response()
        }
    }
}

async fn run_svg(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match lookup(&state, &id) {
        Lookup::Missing => error(StatusCode::NOT_FOUND, format!("unknown run {id:?}"), None),
        Lookup::Pending => error(StatusCode::ACCEPTED, "run pending", None),
        Lookup::Failed(e) => error(StatusCode::UNPROCESSABLE_ENTITY, e, None),
        Lookup::Done(r) => ([(header::CONTENT_TYPE, "image/svg+xml")], r.svg.clone()).into_response(),
    }
}
