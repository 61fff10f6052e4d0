//! Force-directed (Fruchterman–Reingold) node positions, the embedding that
//! feeds dimensionality reduction.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::PolicyGraph;
use crate::points::{seeded_rng, streams, Points};

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("cannot lay out an empty graph")]
    EmptyGraph,
    #[error("node {0:?} has no position")]
    MissingNode(String),
    #[error("position vectors have differing lengths ({expected} vs {found})")]
    RaggedDimensions { expected: usize, found: usize },
    #[error("invalid layout parameter: {0}")]
    InvalidParams(String),
    #[error("non-finite coordinate for node {0:?}")]
    NonFinite(String),
    #[error("embedding csv: {0}")]
    Csv(String),
}

/// Node coordinates with rows locked to the graph's node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    points: Points,
    node_order: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(points: Points, node_order: Vec<String>) -> Result<Self, EmbedError> {
        assert_eq!(points.len(), node_order.len(), "row count must match node order");
        if let Some(i) = points.rows().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(EmbedError::NonFinite(node_order[i].clone()));
        }
        Ok(Self { points, node_order })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn node_order(&self) -> &[String] {
        &self.node_order
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `node_id,x0,…,x{d-1}`, rows in node order.
    pub fn to_csv(&self) -> Vec<u8> {
        let header: Vec<String> =
            std::iter::once("node_id".to_string()).chain((0..self.dim()).map(|i| format!("x{i}"))).collect();
        write_rows_csv(&header, &self.node_order, &self.points)
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, EmbedError> {
        let mut reader = csv::Reader::from_reader(bytes);
        let dim = reader.headers().map_err(|e| EmbedError::Csv(e.to_string()))?.len().saturating_sub(1);
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| EmbedError::Csv(e.to_string()))?;
            ids.push(record[0].to_string());
            for field in record.iter().skip(1) {
                data.push(field.parse::<f64>().map_err(|e| EmbedError::Csv(e.to_string()))?);
            }
        }
        if dim == 0 {
            return Err(EmbedError::Csv("no coordinate columns".into()));
        }
        Self::new(Points::new(data, dim), ids)
    }
}

pub(crate) fn write_rows_csv(header: &[String], ids: &[String], points: &Points) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for (id, row) in ids.iter().zip(points.rows()) {
        let mut record = Vec::with_capacity(row.len() + 1);
        record.push(id.clone());
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub dim: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Ideal edge length `k`; `None` means `sqrt(1/n)`.
    pub optimal_distance: Option<f64>,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self { dim: 2, iterations: 50, seed: 0, optimal_distance: None }
    }
}

impl LayoutParams {
    fn validate(&self) -> Result<(), EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError::InvalidParams("dim must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(EmbedError::InvalidParams("iterations must be >= 1".into()));
        }
        if let Some(k) = self.optimal_distance {
            if !(k.is_finite() && k > 0.0) {
                return Err(EmbedError::InvalidParams("optimal_distance must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn optimal_distance_for(&self, n: usize) -> f64 {
        self.optimal_distance.unwrap_or_else(|| (1.0 / n.max(1) as f64).sqrt())
    }
}

const MIN_DIST: f64 = 0.01;

/// Undirected simple adjacency (no self-loops, parallel edges collapsed).
fn adjacency(g: &PolicyGraph) -> Vec<bool> {
    let n = g.node_count();
    let mut adj = vec![false; n * n];
    for (s, t) in g.edge_indices() {
        if s != t {
            adj[s * n + t] = true;
            adj[t * n + s] = true;
        }
    }
    adj
}

/// Net displacement on every node: repulsion `k²/d` from all nodes plus
/// attraction `d²/k` along edges. Distances below 0.01 are clipped.
pub fn layout_displacement(pos: &Points, g: &PolicyGraph, k: f64) -> Points {
    displacement(pos, &adjacency(g), k)
}

fn displacement(pos: &Points, adj: &[bool], k: f64) -> Points {
    let n = pos.len();
    let dim = pos.dim();
    let k2 = k * k;
    let mut disp = Points::zeros(n, dim);
    let mut delta = vec![0.0; dim];
    for i in 0..n {
        for j in (i + 1)..n {
            let (pi, pj) = (pos.row(i), pos.row(j));
            for a in 0..dim {
                delta[a] = pi[a] - pj[a];
            }
            let dist = delta.iter().map(|v| v * v).sum::<f64>().sqrt().max(MIN_DIST);
            let mut coef = k2 / (dist * dist);
            if adj[i * n + j] {
                coef -= dist / k;
            }
            for a in 0..dim {
                disp.row_mut(i)[a] += delta[a] * coef;
                disp.row_mut(j)[a] -= delta[a] * coef;
            }
        }
    }
    disp
}

/// Runs the simulation and returns positions before rescaling.
///
/// Initial positions are uniform in `[0,1)^dim`. Each step moves every node by
/// the current temperature along its displacement; the temperature starts at
/// a tenth of the widest initial axis span and decays linearly.
pub fn spring_layout_raw(g: &PolicyGraph, p: &LayoutParams) -> Result<Points, EmbedError> {
    p.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(EmbedError::EmptyGraph);
    }
    let mut rng = seeded_rng(p.seed, streams::LAYOUT);
    let mut pos = Points::new((0..n * p.dim).map(|_| rng.random::<f64>()).collect(), p.dim);
    let adj = adjacency(g);
    let k = p.optimal_distance_for(n);

    let span = pos.bounds().iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
    let mut temperature = if span > 0.0 { 0.1 * span } else { 0.1 };
    let cooling = temperature / (p.iterations as f64 + 1.0);

    for _ in 0..p.iterations {
        let disp = displacement(&pos, &adj, k);
        for i in 0..n {
            let d = disp.row(i);
            let length = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(MIN_DIST);
            let scale = temperature / length;
            for (x, dx) in pos.row_mut(i).iter_mut().zip(d) {
                *x += dx * scale;
            }
        }
        temperature -= cooling;
    }
    Ok(pos)
}

/// Maps each axis affinely onto `[-1, 1]`; a zero-span axis collapses to 0.
pub fn rescale_axes(points: &mut Points) {
    let bounds = points.bounds();
    for i in 0..points.len() {
        for (x, &(lo, hi)) in points.row_mut(i).iter_mut().zip(&bounds) {
            let span = hi - lo;
            *x = if span > 0.0 { 2.0 * (*x - lo) / span - 1.0 } else { 0.0 };
        }
    }
}

/// Spring-layout embedding of `g`, each axis rescaled to `[-1, 1]`.
/// Edge direction and relationship are ignored; deterministic in `(g, p)`.
pub fn spring_layout(g: &PolicyGraph, p: &LayoutParams) -> Result<EmbeddingMatrix, EmbedError> {
    let mut pos = spring_layout_raw(g, p)?;
    rescale_axes(&mut pos);
    EmbeddingMatrix::new(pos, g.node_ids())
}

pub fn embedding_from_positions(
    positions: &HashMap<String, Vec<f64>>,
    order: &[String],
) -> Result<EmbeddingMatrix, EmbedError> {
    let mut dim = None;
    let mut data = Vec::new();
    for id in order {
        let v = positions.get(id).ok_or_else(|| EmbedError::MissingNode(id.clone()))?;
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => return Err(EmbedError::RaggedDimensions { expected: d, found: v.len() }),
            _ => {}
        }
        data.extend_from_slice(v);
    }
    let dim = dim.unwrap_or(0);
    if dim == 0 && !order.is_empty() {
        return Err(EmbedError::InvalidParams("zero-length position vectors".into()));
    }
    EmbeddingMatrix::new(Points::new(data, dim), order.to_vec())
}
