//! One policy's projection × clustering grid and the files it produces.

use std::collections::BTreeMap;

use ppkg_core::cluster::{
    annotate_clusters, cluster_points, lda_cluster, node_documents, ClusterAssignment, ClusterMethod, LdaOutput,
};
use ppkg_core::dimred::{project, DrMethod, Projection};
use ppkg_core::embed::EmbeddingMatrix;
use ppkg_core::graph::{degree_summary, export_graph_json, PolicyGraph};
use ppkg_core::render::render_scatter;
use ppkg_core::validate::{evaluate, MetricValue, MetricsReport, ReportScope};
use rayon::prelude::*;
use serde::Serialize;

use crate::RunConfig;

/// One (projection, clustering) cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub dr: DrMethod,
    pub method: ClusterMethod,
    pub assignment: Option<ClusterAssignment>,
    pub annotations: BTreeMap<i32, Vec<String>>,
    pub metrics: MetricValue,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub projections: Vec<(DrMethod, Result<Projection, String>)>,
    /// Present when LDA is in the clustering set.
    pub lda: Option<Result<LdaOutput, String>>,
    pub cells: Vec<CellOutcome>,
    pub report: MetricsReport,
}

fn annotate(a: &ClusterAssignment, g: &PolicyGraph, top: usize) -> BTreeMap<i32, Vec<String>> {
    annotate_clusters(a, g, top).unwrap_or_default()
}

fn score(y: &Projection, a: &ClusterAssignment) -> MetricValue {
    evaluate(y.points(), a.labels()).unwrap_or_else(|e| MetricValue::failed(e.to_string()))
}

/// Projects `embedding` with every configured method and clusters each
/// projection. LDA runs once on node text and is scored on every projection.
/// Failures become undefined cells carrying the error message.
pub fn evaluate_grid(policy_id: &str, g: &PolicyGraph, embedding: &EmbeddingMatrix, c: &RunConfig) -> GridResult {
    let lda = c.clustering.contains(&ClusterMethod::Lda).then(|| {
        let docs = node_documents(g);
        lda_cluster(&docs, &c.cluster_params).map_err(|e| e.to_string())
    });
    let lda_annotations = match &lda {
        Some(Ok(out)) => annotate(&out.assignment, g, c.top_terms),
        _ => BTreeMap::new(),
    };

    let per_dr: Vec<(DrMethod, Result<Projection, String>, Vec<CellOutcome>)> = c
        .dr
        .par_iter()
        .map(|&dr| {
            let projection = project(embedding, dr, &c.tsne, &c.umap).map_err(|e| e.to_string());
            let cells = c
                .clustering
                .iter()
                .map(|&method| {
                    let y = match &projection {
                        Ok(y) => y,
                        Err(e) => {
                            return CellOutcome {
                                dr,
                                method,
                                assignment: None,
                                annotations: BTreeMap::new(),
                                metrics: MetricValue::failed(format!("projection failed: {e}")),
                            }
                        }
                    };
                    let (assignment, annotations) = if method == ClusterMethod::Lda {
                        match lda.as_ref().expect("lda computed when selected") {
                            Ok(out) => (Ok(out.assignment.clone()), lda_annotations.clone()),
                            Err(e) => (Err(e.clone()), BTreeMap::new()),
                        }
                    } else {
                        match cluster_points(method, y.points(), &c.cluster_params) {
                            Ok(a) => {
                                let ann = annotate(&a, g, c.top_terms);
                                (Ok(a), ann)
                            }
                            Err(e) => (Err(e.to_string()), BTreeMap::new()),
                        }
                    };
                    match assignment {
                        Ok(a) => CellOutcome { dr, method, metrics: score(y, &a), assignment: Some(a), annotations },
                        Err(e) => CellOutcome {
                            dr,
                            method,
                            assignment: None,
                            annotations,
                            metrics: MetricValue::failed(format!("clustering failed: {e}")),
                        },
                    }
                })
                .collect();
            (dr, projection, cells)
        })
        .collect();

    let mut projections = Vec::new();
    let mut cells = Vec::new();
    for (dr, p, cs) in per_dr {
        projections.push((dr, p));
        cells.extend(cs);
    }
    let report = MetricsReport::build(
        ReportScope::Policy { policy_id: policy_id.to_string() },
        cells.iter().map(|cell| (cell.dr, cell.method, cell.metrics.clone())),
    )
    .expect("config rejects duplicate methods");
    GridResult { projections, lda, cells, report }
}

#[derive(Serialize)]
struct ClusterNote<'a> {
    id: i32,
    size: usize,
    terms: &'a [String],
}

#[derive(Serialize)]
struct AnnotationsDoc<'a> {
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    dr: Option<&'static str>,
    k_found: usize,
    noise: usize,
    clusters: Vec<ClusterNote<'a>>,
}

fn annotations_json(dr: Option<DrMethod>, a: &ClusterAssignment, ann: &BTreeMap<i32, Vec<String>>) -> Vec<u8> {
    let sizes = a.sizes();
    let doc = AnnotationsDoc {
        method: a.method().tag(),
        dr: dr.map(DrMethod::tag),
        k_found: a.k_found(),
        noise: a.noise_count(),
        clusters: sizes
            .iter()
            .enumerate()
            .map(|(id, &size)| ClusterNote {
                id: id as i32,
                size,
                terms: ann.get(&(id as i32)).map(Vec::as_slice).unwrap_or(&[]),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("annotations serialize");
    out.push(b'\n');
    out
}

/// All files for one policy as `(path relative to the policy dir, bytes)`,
/// in a fixed order.
pub fn policy_files(g: &PolicyGraph, embedding: Option<&EmbeddingMatrix>, grid: Option<&GridResult>) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![("graph.json".to_string(), export_graph_json(g, &degree_summary(g)))];
    if let Some(e) = embedding {
        files.push(("embedding.csv".into(), e.to_csv()));
    }
    let Some(grid) = grid else { return files };
    if let Some(Ok(lda)) = &grid.lda {
        let order = g.node_ids();
        files.push(("assignment_lda.csv".into(), lda.assignment.to_csv(&order)));
        let ann = grid
            .cells
            .iter()
            .find(|c| c.method == ClusterMethod::Lda && c.assignment.is_some())
            .map(|c| c.annotations.clone())
            .unwrap_or_default();
        files.push(("annotations_lda.json".into(), annotations_json(None, &lda.assignment, &ann)));
    }
    for (dr, projection) in &grid.projections {
        let Ok(y) = projection else { continue };
        files.push((format!("projection_{}.csv", dr.tag()), y.to_csv()));
        files.push((format!("projection_{}.json", dr.tag()), y.sidecar_json()));
        for cell in grid.cells.iter().filter(|c| c.dr == *dr) {
            let Some(a) = &cell.assignment else { continue };
            let stem = format!("{}_{}", dr.tag(), cell.method.tag());
            if cell.method != ClusterMethod::Lda {
                files.push((format!("assignment_{stem}.csv"), a.to_csv(y.node_order())));
                files.push((format!("annotations_{stem}.json"), annotations_json(Some(*dr), a, &cell.annotations)));
            }
            files.push((format!("scatter_{stem}.svg"), render_scatter(y.points(), a.labels(), &cell.annotations)));
        }
    }
    files.push(("metrics.json".into(), grid.report.to_json()));
    files.push(("metrics.csv".into(), grid.report.to_csv().into_bytes()));
    files
}
