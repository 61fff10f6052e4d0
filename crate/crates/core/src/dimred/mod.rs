//! Reduction of an embedding to two dimensions: PCA (linear), t-SNE and UMAP
//! (non-linear). All three keep the source row order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{write_rows_csv, EmbeddingMatrix};
use crate::points::Points;

mod pca;
mod tsne;
mod umap;

pub use pca::{pca, pca_points, PcaOutput};
pub use tsne::{
    conditional_probabilities, joint_probabilities, kl_divergence, perplexity_calibration, tsne, Calibration,
    TsneOutput, TsneParams,
};
pub use umap::{fit_ab, fuzzy_simplicial_set, knn_graph, smooth_knn_calibration, umap, SmoothKnn, UmapOutput, UmapParams};

#[derive(Debug, Error, PartialEq)]
pub enum DimRedError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrMethod {
    Tsne,
    Umap,
    Pca,
}

impl DrMethod {
    /// Report column order.
    pub const ALL: [DrMethod; 3] = [DrMethod::Tsne, DrMethod::Umap, DrMethod::Pca];

    /// Machine tag used in configs, file names and the HTTP API.
    pub fn tag(self) -> &'static str {
        match self {
            DrMethod::Tsne => "tsne",
            DrMethod::Umap => "umap",
            DrMethod::Pca => "pca",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }

    pub fn display_name(self) -> &'static str {
        match self {
            DrMethod::Tsne => "t-SNE",
            DrMethod::Umap => "UMAP",
            DrMethod::Pca => "PCA",
        }
    }
}

impl fmt::Display for DrMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Parameters echoed alongside a projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum DrParams {
    Pca { out_dim: usize },
    Tsne(TsneParams),
    Umap(UmapParams),
}

impl DrParams {
    pub fn method(&self) -> DrMethod {
        match self {
            DrParams::Pca { .. } => DrMethod::Pca,
            DrParams::Tsne(_) => DrMethod::Tsne,
            DrParams::Umap(_) => DrMethod::Umap,
        }
    }
}

/// Runs one reduction to two dimensions.
pub fn project(
    x: &EmbeddingMatrix,
    method: DrMethod,
    tsne_params: &TsneParams,
    umap_params: &UmapParams,
) -> Result<Projection, DimRedError> {
    match method {
        DrMethod::Pca => pca(x, 2).map(|o| o.projection),
        DrMethod::Tsne => tsne(x, tsne_params).map(|o| o.projection),
        DrMethod::Umap => umap(x, umap_params).map(|o| o.projection),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    points: Points,
    params: DrParams,
    node_order: Vec<String>,
}

impl Projection {
    pub fn new(points: Points, params: DrParams, node_order: Vec<String>) -> Self {
        assert_eq!(points.len(), node_order.len(), "row count must match node order");
        Self { points, params, node_order }
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn method(&self) -> DrMethod {
        self.params.method()
    }

    pub fn params(&self) -> &DrParams {
        &self.params
    }

    pub fn node_order(&self) -> &[String] {
        &self.node_order
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV `node_id,x,y` (further columns `x2…` when more than two dims).
    pub fn to_csv(&self) -> Vec<u8> {
        let mut header = vec!["node_id".to_string()];
        for i in 0..self.points.dim() {
            header.push(match i {
                0 => "x".into(),
                1 => "y".into(),
                _ => format!("x{i}"),
            });
        }
        write_rows_csv(&header, &self.node_order, &self.points)
    }

    /// JSON sidecar echoing method and parameters (seed included).
    pub fn sidecar_json(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            method: &'static str,
            n: usize,
            params: &'a DrParams,
        }
        let mut out = serde_json::to_vec_pretty(&Sidecar {
            method: self.method().tag(),
            n: self.len(),
            params: &self.params,
        })
        .expect("sidecar serializes");
        out.push(b'\n');
        out
    }
}
