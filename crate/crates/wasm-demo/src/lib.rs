//! Browser bindings: load a policy graph, lay it out, then project and
//! cluster it client-side.

use ppkg_core::cluster::{annotate_clusters, cluster_points, lda_cluster, node_documents, ClusterMethod, ClusterParams};
use ppkg_core::dimred::{project, DrMethod, TsneParams, UmapParams};
use ppkg_core::embed::{spring_layout, LayoutParams};
use ppkg_core::graph::{degree_summary, export_graph_json, parse_graphml};
use ppkg_core::render::render_scatter;
use ppkg_core::validate::evaluate;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const SAMPLE: &str = include_str!("../../../fixtures/offerup.graphml");

/// The bundled OfferUp-style policy graph.
#[wasm_bindgen]
pub fn sample_graphml() -> String {
    SAMPLE.to_string()
}

fn layout_json(graphml: &str, seed: u64) -> Result<String, String> {
    let g = parse_graphml(graphml.as_bytes()).map_err(|e| e.to_string())?;
    let export: Value = serde_json::from_slice(&export_graph_json(&g, &degree_summary(&g))).expect("export is json");
    let positions: Vec<[f64; 2]> = if g.node_count() == 0 {
        Vec::new()
    } else {
        let e = spring_layout(&g, &LayoutParams { seed, ..Default::default() }).map_err(|e| e.to_string())?;
        e.points().rows().map(|r| [r[0], r[1]]).collect()
    };
    Ok(json!({ "graph": export, "positions": positions }).to_string())
}

fn cluster_json(graphml: &str, dr: &str, clustering: &str, k: usize, seed: u64) -> Result<String, String> {
    let dr = DrMethod::from_tag(dr).ok_or_else(|| format!("unknown projection {dr:?}"))?;
    let method = ClusterMethod::from_tag(clustering).ok_or_else(|| format!("unknown clustering {clustering:?}"))?;
    let g = parse_graphml(graphml.as_bytes()).map_err(|e| e.to_string())?;
    let embedding = spring_layout(&g, &LayoutParams { seed, ..Default::default() }).map_err(|e| e.to_string())?;
    let n = g.node_count();
    let tsne = TsneParams { perplexity: ((n as f64 - 1.0) / 3.0).clamp(2.0, 30.0), seed, ..Default::default() };
    let umap = UmapParams { n_neighbors: (n / 4).clamp(2, 15), seed, ..Default::default() };
    let y = project(&embedding, dr, &tsne, &umap).map_err(|e| e.to_string())?;
    let params = ClusterParams { k, n_topics: k, min_cluster_size: 3, seed, ..Default::default() };
    let assignment = if method == ClusterMethod::Lda {
        lda_cluster(&node_documents(&g), &params).map(|o| o.assignment)
    } else {
        cluster_points(method, y.points(), &params)
    }
    .map_err(|e| e.to_string())?;
    let annotations = annotate_clusters(&assignment, &g, 3).map_err(|e| e.to_string())?;
    let metrics = evaluate(y.points(), assignment.labels()).map_err(|e| e.to_string())?;
    let svg = String::from_utf8(render_scatter(y.points(), assignment.labels(), &annotations)).expect("svg is utf-8");
    Ok(json!({
        "node_ids": y.node_order(),
        "labels": assignment.labels(),
        "k_found": assignment.k_found(),
        "metrics": metrics,
        "annotations": annotations,
        "svg": svg,
    })
    .to_string())
}

/// Parses GraphML and returns `{graph, positions}`: the explorer export plus
/// spring-layout coordinates in node order.
#[wasm_bindgen]
pub fn layout_graph(graphml: &str, seed: u32) -> Result<String, JsError> {
    layout_json(graphml, seed as u64).map_err(|e| JsError::new(&e))
}

/// Lays out, projects and clusters a graph. Returns labels, metrics,
/// annotations and the scatterplot SVG as JSON.
#[wasm_bindgen]
pub fn cluster_graph(graphml: &str, dr: &str, clustering: &str, k: u32, seed: u32) -> Result<String, JsError> {
    cluster_json(graphml, dr, clustering, k as usize, seed as u64).map_err(|e| JsError::new(&e))
}
