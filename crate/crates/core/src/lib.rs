//! Privacy-policy knowledge graph analysis: GraphML ingestion, spring-layout
//! embeddings, PCA / t-SNE / UMAP projections, six clustering methods and
//! cluster validity metrics.

pub mod cluster;
pub mod dimred;
pub mod embed;
pub mod graph;
pub mod points;
pub mod render;
pub mod synth;
pub mod validate;

pub use embed::{spring_layout, EmbeddingMatrix, LayoutParams};
pub use graph::{parse_graphml, PolicyGraph};
pub use points::Points;
pub use render::render_scatter;
pub use validate::{adjusted_rand, davies_bouldin, evaluate, silhouette, MetricValue, MetricsReport};
