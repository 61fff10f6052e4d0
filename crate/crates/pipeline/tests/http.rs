use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use ppkg_core::dimred::DrMethod;
use ppkg_pipeline::serve::{router, AppState};
use ppkg_pipeline::RunConfig;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn app() -> Router {
    let mut c = RunConfig::with_seed(11);
    c.inputs = vec![fixture("offerup.graphml")];
    c.dr = vec![DrMethod::Pca, DrMethod::Umap];
    c.umap.n_neighbors = 5;
    c.umap.n_epochs = 100;
    router(Arc::new(AppState::load(c).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req.header("content-type", "application/json").body(Body::from(v.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp.headers().get("content-type").map(|v| v.to_str().unwrap().to_string()).unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, ctype, bytes)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, _, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn wait_done(app: &Router, run_id: &str) -> Value {
    for _ in 0..600 {
        let (s, v) = call_json(app, "GET", &format!("/api/runs/{run_id}"), None).await;
        assert_eq!(s, StatusCode::OK);
        if v["status"] != "pending" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("run {run_id} did not finish");
}

#[tokio::test]
async fn lists_policies() {
    let app = app();
    let (s, v) = call_json(&app, "GET", "/api/policies", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, json!([{ "id": "offerup", "node_count": 21, "edge_count": 24 }]));
}

#[tokio::test]
async fn graph_export_carries_edge_text() {
    let app = app();
    let (s, ctype, body) = call(&app, "GET", "/api/policies/offerup/graph", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(ctype, "application/json");
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 21);
    let subsum = v["edges"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["relationship"] == "SUBSUM" && e["source"] == "personal_info" && e["target"] == "device_info")
        .unwrap();
    assert!(subsum["text"].as_str().unwrap().starts_with("OfferUp collects information"));

    let (s, v) = call_json(&app, "GET", "/api/policies/nope/graph", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn validation_names_the_field() {
    let app = app();
    let cases = [
        (json!({ "dr": "mds", "clustering": "mbkmeans", "seed": 1 }), "dr"),
        (json!({ "dr": "pca", "clustering": "kmedoids", "seed": 1 }), "clustering"),
        (json!({ "dr": "pca", "clustering": "mbkmeans" }), "seed"),
        (json!({ "dr": "pca", "clustering": "mbkmeans", "seed": -3 }), "seed"),
        (json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "params": { "k": 0 } }), "params"),
        (json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "params": { "kk": 3 } }), "params"),
        (json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "tsne": { "perplexity": "high" } }), "tsne"),
        (json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "colour": "red" }), "colour"),
        (json!([1, 2]), "body"),
    ];
    for (body, field) in cases {
        let (s, v) = call_json(&app, "POST", "/api/policies/offerup/run", Some(body.clone())).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(v["field"], field, "{body}");
        assert!(v["error"].is_string());
    }
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = app();
    let body = json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1 });
    let (s, _) = call_json(&app, "POST", "/api/policies/missing/run", Some(body)).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call_json(&app, "GET", "/api/runs/deadbeef", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call_json(&app, "GET", "/api/runs/deadbeef/svg", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn layout_mismatch_is_409() {
    let app = app();
    let ok = json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "layout": { "dim": 2, "iterations": 50 } });
    let (s, _) = call_json(&app, "POST", "/api/policies/offerup/run", Some(ok)).await;
    assert!(s.is_success());
    let bad = json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "layout": { "dim": 3 } });
    let (s, v) = call_json(&app, "POST", "/api/policies/offerup/run", Some(bad)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["field"], "layout");
}

#[tokio::test]
async fn identical_requests_share_a_run() {
    let app = app();
    let body = json!({ "dr": "umap", "clustering": "agglomerative", "seed": 5, "params": { "k": 4 } });
    let (s1, a) = call_json(&app, "POST", "/api/policies/offerup/run", Some(body.clone())).await;
    let (s2, b) = call_json(&app, "POST", "/api/policies/offerup/run", Some(body.clone())).await;
    assert_eq!(s1, StatusCode::ACCEPTED);
    assert!(s2.is_success());
    let run_id = a["run_id"].as_str().unwrap().to_string();
    assert_eq!(run_id.len(), 64);
    assert_eq!(a, b);

    let first = wait_done(&app, &run_id).await;
    assert_eq!(first["status"], "done", "{first}");
    assert_eq!(first["node_ids"].as_array().unwrap().len(), 21);
    assert_eq!(first["positions"].as_array().unwrap().len(), 21);
    let labels: Vec<i64> = first["labels"].as_array().unwrap().iter().map(|l| l.as_i64().unwrap()).collect();
    assert_eq!(labels.iter().max(), Some(&3));
    assert!(first["metrics"]["silhouette"].is_number());
    assert_eq!(first["annotations"].as_object().unwrap().len(), 4);

    let (s, ctype, svg) = call(&app, "GET", &format!("/api/runs/{run_id}/svg"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(ctype, "image/svg+xml");
    let svg = String::from_utf8(svg).unwrap();
    assert_eq!(svg.matches("<circle").count(), 21);

    // a fresh service computes the same payload for the same request
    let other = self::app();
    let (_, c) = call_json(&other, "POST", "/api/policies/offerup/run", Some(body)).await;
    assert_eq!(c["run_id"], run_id);
    assert_eq!(wait_done(&other, &run_id).await, first);
}

#[tokio::test]
async fn different_seed_or_k_is_a_new_run() {
    let app = app();
    let base = json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 5, "params": { "k": 5 } });
    let (_, a) = call_json(&app, "POST", "/api/policies/offerup/run", Some(base)).await;
    let (_, b) =
        call_json(&app, "POST", "/api/policies/offerup/run", Some(json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 6, "params": { "k": 5 } })))
            .await;
    let (_, c) =
        call_json(&app, "POST", "/api/policies/offerup/run", Some(json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 5, "params": { "k": 3 } })))
            .await;
    assert_ne!(a["run_id"], b["run_id"]);
    assert_ne!(a["run_id"], c["run_id"]);
    assert_ne!(b["run_id"], c["run_id"]);
}

#[tokio::test]
async fn compute_failures_are_reported() {
    let app = app();
    let body = json!({ "dr": "pca", "clustering": "mbkmeans", "seed": 1, "params": { "k": 50 } });
    let (_, a) = call_json(&app, "POST", "/api/policies/offerup/run", Some(body)).await;
    let run_id = a["run_id"].as_str().unwrap();
    let v = wait_done(&app, run_id).await;
    assert_eq!(v["status"], "failed");
    assert!(v["error"].as_str().unwrap().contains("21"));
    let (s, _) = call_json(&app, "GET", &format!("/api/runs/{run_id}/svg"), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn lda_runs_over_node_text() {
    let app = app();
    let body = json!({ "dr": "pca", "clustering": "lda", "seed": 2, "params": { "n_topics": 3, "gibbs_iters": 200 } });
    let (_, a) = call_json(&app, "POST", "/api/policies/offerup/run", Some(body)).await;
    let v = wait_done(&app, a["run_id"].as_str().unwrap()).await;
    assert_eq!(v["status"], "done", "{v}");
    assert!(v["labels"].as_array().unwrap().iter().all(|l| (0..3).contains(&l.as_i64().unwrap())));
}
