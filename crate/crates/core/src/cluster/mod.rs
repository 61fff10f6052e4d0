//! Clustering of projected points (and of node text, for LDA) into
//! canonical per-node labels.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod agglomerative;
mod annotate;
mod dbscan;
mod hdbscan;
mod kmeans;
mod lda;
mod spectral;
pub mod text;

pub use agglomerative::{agglomerative, agglomerative_labels};
pub use annotate::annotate_clusters;
pub use dbscan::{dbscan, dbscan_labels};
pub use hdbscan::{hdbscan, hdbscan_labels};
pub use kmeans::{inertia, kmeans_lloyd, kmeans_plus_plus, minibatch_kmeans, minibatch_kmeans_fit, KMeansFit};
pub use lda::{lda_cluster, node_documents, LdaModel, LdaOutput};
pub use spectral::{knn_affinity, normalized_laplacian, rbf_affinity, spectral, spectral_embedding, spectral_from_affinity};

/// Label of points assigned to no cluster.
pub const NOISE: i32 = -1;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid clustering parameter: {0}")]
    InvalidParams(String),
    #[error("no tokens in any document")]
    EmptyVocabulary,
    #[error("input length {got} does not match graph size {expected}")]
    Misaligned { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    Mbkmeans,
    Agglomerative,
    Hdbscan,
    Spectral,
    Lda,
    Dbscan,
}

impl ClusterMethod {
    /// Report row order.
    pub const ALL: [ClusterMethod; 6] = [
        ClusterMethod::Mbkmeans,
        ClusterMethod::Agglomerative,
        ClusterMethod::Hdbscan,
        ClusterMethod::Spectral,
        ClusterMethod::Lda,
        ClusterMethod::Dbscan,
    ];

    /// The default grid leaves DBSCAN out; it stays runnable on request.
    pub const DEFAULT_GRID: [ClusterMethod; 5] = [
        ClusterMethod::Mbkmeans,
        ClusterMethod::Agglomerative,
        ClusterMethod::Hdbscan,
        ClusterMethod::Spectral,
        ClusterMethod::Lda,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ClusterMethod::Mbkmeans => "mbkmeans",
            ClusterMethod::Agglomerative => "agglomerative",
            ClusterMethod::Hdbscan => "hdbscan",
            ClusterMethod::Spectral => "spectral",
            ClusterMethod::Lda => "lda",
            ClusterMethod::Dbscan => "dbscan",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClusterMethod::Mbkmeans => "MB K-means",
            ClusterMethod::Agglomerative => "Agglomerative",
            ClusterMethod::Hdbscan => "HDBSCAN",
            ClusterMethod::Spectral => "Spectral",
            ClusterMethod::Lda => "LDA",
            ClusterMethod::Dbscan => "DBSCAN",
        }
    }

    /// True for methods that read node text instead of coordinates.
    pub fn uses_text(self) -> bool {
        self == ClusterMethod::Lda
    }
}

impl fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Ward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Affinity {
    Rbf { gamma: f64 },
    Knn { m: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    pub k: usize,
    pub batch_size: usize,
    pub linkage: Linkage,
    pub eps: f64,
    pub min_pts: usize,
    pub min_cluster_size: usize,
    /// Core-distance neighbor count; `None` uses `min_cluster_size`.
    pub min_samples: Option<usize>,
    pub affinity: Affinity,
    pub n_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gibbs_iters: usize,
    pub seed: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            k: 5,
            batch_size: 100,
            linkage: Linkage::Ward,
            eps: 0.5,
            min_pts: 5,
            min_cluster_size: 5,
            min_samples: None,
            affinity: Affinity::Rbf { gamma: 1.0 },
            n_topics: 5,
            alpha: 0.1,
            beta: 0.01,
            gibbs_iters: 1000,
            seed: 0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<(), ClusterError> {
        let bad = |m: &str| Err(ClusterError::InvalidParams(m.to_string()));
        let counts = [
            ("k", self.k),
            ("batch_size", self.batch_size),
            ("min_pts", self.min_pts),
            ("min_cluster_size", self.min_cluster_size),
            ("n_topics", self.n_topics),
            ("gibbs_iters", self.gibbs_iters),
            ("min_samples", self.min_samples.unwrap_or(1)),
        ];
        for (name, v) in counts {
            if v == 0 {
                return bad(&format!("{name} must be >= 1"));
            }
        }
        if !(self.eps > 0.0) {
            return bad("eps must be > 0");
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return bad("alpha and beta must be > 0");
        }
        match self.affinity {
            Affinity::Rbf { gamma } if !(gamma > 0.0) => bad("rbf gamma must be > 0"),
            Affinity::Knn { m: 0 } => bad("knn m must be >= 1"),
            _ => Ok(()),
        }
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples.unwrap_or(self.min_cluster_size)
    }
}

/// Clusters coordinates with any geometric method. LDA reads text and is
/// rejected here; use [`lda_cluster`].
pub fn cluster_points(
    method: ClusterMethod,
    x: &crate::points::Points,
    p: &ClusterParams,
) -> Result<ClusterAssignment, ClusterError> {
    match method {
        ClusterMethod::Mbkmeans => minibatch_kmeans(x, p),
        ClusterMethod::Agglomerative => agglomerative(x, p),
        ClusterMethod::Hdbscan => hdbscan(x, p),
        ClusterMethod::Spectral => spectral(x, p),
        ClusterMethod::Dbscan => dbscan(x, p),
        ClusterMethod::Lda => Err(ClusterError::InvalidParams("lda clusters text, not coordinates".into())),
    }
}

/// Per-node labels (−1 = noise), canonicalized so non-noise labels are
/// `0..k_found` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    labels: Vec<i32>,
    k_found: usize,
    method: ClusterMethod,
    params: ClusterParams,
}

impl ClusterAssignment {
    pub fn new(raw_labels: &[i64], method: ClusterMethod, params: ClusterParams) -> Self {
        let (labels, k_found) = canonicalize(raw_labels);
        Self { labels, k_found, method, params }
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn k_found(&self) -> usize {
        self.k_found
    }

    pub fn method(&self) -> ClusterMethod {
        self.method
    }

    pub fn params(&self) -> &ClusterParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    /// Number of members per cluster id.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k_found];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    /// CSV `node_id,label` in node order.
    pub fn to_csv(&self, node_order: &[String]) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["node_id", "label"]).expect("in-memory write");
        for (id, l) in node_order.iter().zip(&self.labels) {
            w.write_record([id.as_str(), &l.to_string()]).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Relabels by first appearance; negative labels become [`NOISE`].
pub fn canonicalize(raw: &[i64]) -> (Vec<i32>, usize) {
    let mut map: HashMap<i64, i32> = HashMap::new();
    let labels = raw
        .iter()
        .map(|&l| {
            if l < 0 {
                NOISE
            } else {
                let next = map.len() as i32;
                *map.entry(l).or_insert(next)
            }
        })
        .collect();
    (labels, map.len())
}
