//! Privacy-policy knowledge graphs: GraphML ingestion, degree statistics and
//! the JSON export consumed by the explorer.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relationship tag for an entity collecting a data type.
pub const REL_COLLECT: &str = "COLLECT";
/// Relationship tag for a data category subsuming a more specific one.
pub const REL_SUBSUM: &str = "SUBSUM";
/// Node type tag for data categories.
pub const TYPE_DATA: &str = "DATA";
/// Node type tag for actors (first or third parties).
pub const TYPE_ACTOR: &str = "ACTOR";

/// Number of degree buckets used by [`export_graph_json`].
pub const DEFAULT_COLOR_BUCKETS: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed GraphML: {0}")]
    MalformedXml(String),
    #[error("malformed graph JSON: {0}")]
    MalformedJson(String),
    #[error("edge {edge_id} references unknown node {node_id:?}")]
    DanglingEdge { edge_id: String, node_id: String },
    #[error("duplicate node id {0:?}")]
    DuplicateNodeId(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdgeId(String),
    #[error("empty node id")]
    EmptyNodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyNode {
    pub id: String,
    /// Entity phrase, kept verbatim (extraction artifacts included).
    pub label: String,
    pub node_type: String,
    /// Data keys other than `label`/`type`, keyed by their GraphML name.
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyEdge {
    pub source: String,
    pub target: String,
    pub relationship: String,
    /// The policy sentence the relationship was extracted from.
    pub text: String,
    pub edge_id: String,
    pub attrs: BTreeMap<String, String>,
}

/// Directed multigraph of policy entities. Immutable once built; node order is
/// the canonical row order of every matrix derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyGraph {
    nodes: Vec<PolicyNode>,
    edges: Vec<PolicyEdge>,
    node_index: HashMap<String, usize>,
}

impl PolicyGraph {
    /// Validates ids and edge endpoints and builds the node index.
    pub fn from_parts(nodes: Vec<PolicyNode>, edges: Vec<PolicyEdge>) -> Result<Self, GraphError> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if node.id.is_empty() {
                return Err(GraphError::EmptyNodeId);
            }
            if node_index.insert(node.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNodeId(node.id.clone()));
            }
        }
        let mut edge_ids = HashSet::with_capacity(edges.len());
        for edge in &edges {
            for endpoint in [&edge.source, &edge.target] {
                if !node_index.contains_key(endpoint) {
                    return Err(GraphError::DanglingEdge {
                        edge_id: edge.edge_id.clone(),
                        node_id: endpoint.clone(),
                    });
                }
            }
            if !edge_ids.insert(edge.edge_id.as_str()) {
                return Err(GraphError::DuplicateEdgeId(edge.edge_id.clone()));
            }
        }
        Ok(Self { nodes, edges, node_index })
    }

    pub fn empty() -> Self {
        Self { nodes: Vec::new(), edges: Vec::new(), node_index: HashMap::new() }
    }

    pub fn nodes(&self) -> &[PolicyNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[PolicyEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of `id` in the node sequence.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn node(&self, id: &str) -> Option<&PolicyNode> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn node_ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    /// Edges as `(source_index, target_index)` pairs in edge order.
    pub fn edge_indices(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|e| (self.node_index[&e.source], self.node_index[&e.target]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyDomain {
    Node,
    Edge,
}

#[derive(Debug, Default)]
struct KeyTable {
    // (domain, key id) -> (attr.name, default)
    keys: HashMap<(KeyDomainTag, String), (String, Option<String>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum KeyDomainTag {
    Node,
    Edge,
    All,
}

impl KeyTable {
    fn resolve(&self, domain: KeyDomain, key: &str) -> Option<&(String, Option<String>)> {
        let tag = match domain {
            KeyDomain::Node => KeyDomainTag::Node,
            KeyDomain::Edge => KeyDomainTag::Edge,
        };
        self.keys
            .get(&(tag, key.to_string()))
            .or_else(|| self.keys.get(&(KeyDomainTag::All, key.to_string())))
    }

    /// Declared defaults for a domain, by attribute name.
    fn defaults(&self, domain: KeyDomain) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for ((tag, _), (name, default)) in &self.keys {
            let applies = matches!(
                (tag, domain),
                (KeyDomainTag::All, _)
                    | (KeyDomainTag::Node, KeyDomain::Node)
                    | (KeyDomainTag::Edge, KeyDomain::Edge)
            );
            if let (true, Some(d)) = (applies, default) {
                out.insert(name.clone(), d.clone());
            }
        }
        out
    }
}

fn text_of(node: roxmltree::Node<'_, '_>) -> String {
    node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect()
}

fn data_values(
    element: roxmltree::Node<'_, '_>,
    domain: KeyDomain,
    keys: &KeyTable,
) -> BTreeMap<String, String> {
    let mut values = keys.defaults(domain);
    for data in element.children().filter(|c| c.tag_name().name() == "data") {
        let Some(key) = data.attribute("key") else { continue };
        let name = keys.resolve(domain, key).map(|(n, _)| n.clone()).unwrap_or_else(|| key.to_string());
        values.insert(name, text_of(data));
    }
    values
}

/// Parses a GraphML document as emitted by the upstream policy extractor.
///
/// Data keys are matched by their declared `attr.name` (`label`, `type`,
/// `relationship`, `text`); any other key lands in `attrs`. Nodes and edges
/// keep document order. Edges without an `id` attribute get `e{position}`.
pub fn parse_graphml(bytes: &[u8]) -> Result<PolicyGraph, GraphError> {
    let text = std::str::from_utf8(bytes).map_err(|e| GraphError::MalformedXml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| GraphError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(GraphError::MalformedXml(format!(
            "root element is <{}>, expected <graphml>",
            root.tag_name().name()
        )));
    }

    let mut keys = KeyTable::default();
    for key in root.children().filter(|c| c.tag_name().name() == "key") {
        let Some(id) = key.attribute("id") else {
            return Err(GraphError::MalformedXml("<key> without id".into()));
        };
        let tag = match key.attribute("for").unwrap_or("all") {
            "node" => KeyDomainTag::Node,
            "edge" => KeyDomainTag::Edge,
            "all" => KeyDomainTag::All,
            // graph/hyperedge/port keys carry nothing we interpret
            _ => continue,
        };
        let name = key.attribute("attr.name").unwrap_or(id).to_string();
        let default = key
            .children()
            .find(|c| c.tag_name().name() == "default")
            .map(text_of);
        keys.keys.insert((tag, id.to_string()), (name, default));
    }

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for element in root.descendants().filter(|n| n.is_element()) {
        match element.tag_name().name() {
            "node" => {
                let id = element
                    .attribute("id")
                    .ok_or_else(|| GraphError::MalformedXml("<node> without id".into()))?;
                let mut values = data_values(element, KeyDomain::Node, &keys);
                nodes.push(PolicyNode {
                    id: id.to_string(),
                    label: values.remove("label").unwrap_or_default(),
                    node_type: values.remove("type").unwrap_or_default(),
                    attrs: values,
                });
            }
            "edge" => {
                let endpoint = |name: &str| {
                    element
                        .attribute(name)
                        .map(str::to_string)
                        .ok_or_else(|| GraphError::MalformedXml(format!("<edge> without {name}")))
                };
                let source = endpoint("source")?;
                let target = endpoint("target")?;
                let mut values = data_values(element, KeyDomain::Edge, &keys);
                let edge_id = element
                    .attribute("id")
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("e{}", edges.len()));
                edges.push(PolicyEdge {
                    source,
                    target,
                    relationship: values.remove("relationship").unwrap_or_default(),
                    text: values.remove("text").unwrap_or_default(),
                    edge_id,
                    attrs: values,
                });
            }
            _ => {}
        }
    }
    PolicyGraph::from_parts(nodes, edges)
}

/// Total (in + out) degree per node. A self-loop contributes 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeSummary {
    pub degrees: BTreeMap<String, usize>,
    pub max_degree: usize,
}

impl DegreeSummary {
    pub fn get(&self, id: &str) -> usize {
        self.degrees.get(id).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.degrees.values().sum()
    }
}

pub fn degree_summary(g: &PolicyGraph) -> DegreeSummary {
    let mut per_node = vec![0usize; g.node_count()];
    for (s, t) in g.edge_indices() {
        per_node[s] += 1;
        per_node[t] += 1;
    }
    let max_degree = per_node.iter().copied().max().unwrap_or(0);
    let degrees = g.nodes().iter().zip(per_node).map(|(n, d)| (n.id.clone(), d)).collect();
    DegreeSummary { degrees, max_degree }
}

/// `floor(n_buckets * degree / (max_degree + 1))`, always in `0..n_buckets`.
pub fn degree_color_bucket(degree: usize, max_degree: usize, n_buckets: usize) -> usize {
    if n_buckets == 0 {
        return 0;
    }
    let degree = degree.min(max_degree);
    ((n_buckets as u128 * degree as u128) / (max_degree as u128 + 1)) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub id: String,
    pub label: String,
    #[serde(rename = "type")]
    pub node_type: String,
    pub degree: usize,
    pub color_bucket: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportEdge {
    pub source: String,
    pub target: String,
    pub relationship: String,
    pub text: String,
    pub id: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, String>,
}

/// Document shape of the graph export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<ExportEdge>,
}

impl GraphExport {
    pub fn build(g: &PolicyGraph, degrees: &DegreeSummary) -> Self {
        let nodes = g
            .nodes()
            .iter()
            .map(|n| {
                let degree = degrees.get(&n.id);
                ExportNode {
                    id: n.id.clone(),
                    label: n.label.clone(),
                    node_type: n.node_type.clone(),
                    degree,
                    color_bucket: degree_color_bucket(degree, degrees.max_degree, DEFAULT_COLOR_BUCKETS),
                    attrs: n.attrs.clone(),
                }
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .map(|e| ExportEdge {
                source: e.source.clone(),
                target: e.target.clone(),
                relationship: e.relationship.clone(),
                text: e.text.clone(),
                id: e.edge_id.clone(),
                attrs: e.attrs.clone(),
            })
            .collect();
        Self { nodes, edges }
    }
}

/// Serializes the graph for the explorer: compact JSON, fixed key order,
/// trailing newline.
pub fn export_graph_json(g: &PolicyGraph, degrees: &DegreeSummary) -> Vec<u8> {
    let mut out = serde_json::to_vec(&GraphExport::build(g, degrees)).expect("export is always serializable");
    out.push(b'\n');
    out
}

/// Reads a graph back from [`export_graph_json`] output. Degree and bucket
/// fields are derived data and ignored.
pub fn parse_graph_json(bytes: &[u8]) -> Result<PolicyGraph, GraphError> {
    let export: GraphExport =
        serde_json::from_slice(bytes).map_err(|e| GraphError::MalformedJson(e.to_string()))?;
    let nodes = export
        .nodes
        .into_iter()
        .map(|n| PolicyNode { id: n.id, label: n.label, node_type: n.node_type, attrs: n.attrs })
        .collect();
    let edges = export
        .edges
        .into_iter()
        .map(|e| PolicyEdge {
            source: e.source,
            target: e.target,
            relationship: e.relationship,
            text: e.text,
            edge_id: e.id,
            attrs: e.attrs,
        })
        .collect();
    PolicyGraph::from_parts(nodes, edges)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Serializes to GraphML that [`parse_graphml`] reads back unchanged. Extra
/// attributes get one string key per name.
pub fn write_graphml(g: &PolicyGraph) -> String {
    use std::fmt::Write as _;
    let node_extra: BTreeSet<&str> = g.nodes().iter().flat_map(|n| n.attrs.keys().map(String::as_str)).collect();
    let edge_extra: BTreeSet<&str> = g.edges().iter().flat_map(|e| e.attrs.keys().map(String::as_str)).collect();
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    let mut key = |id: &str, domain: &str, name: &str| {
        writeln!(
            s,
            "  <key id=\"{}\" for=\"{domain}\" attr.name=\"{}\" attr.type=\"string\"/>",
            xml_escape(id),
            xml_escape(name)
        )
        .unwrap();
    };
    key("label", "node", "label");
    key("type", "node", "type");
    key("relationship", "edge", "relationship");
    key("text", "edge", "text");
    for name in &node_extra {
        key(&format!("n_{name}"), "node", name);
    }
    for name in &edge_extra {
        key(&format!("e_{name}"), "edge", name);
    }
    s.push_str("  <graph edgedefault=\"directed\">\n");
    for n in g.nodes() {
        writeln!(s, "    <node id=\"{}\">", xml_escape(&n.id)).unwrap();
        writeln!(s, "      <data key=\"label\">{}</data>", xml_escape(&n.label)).unwrap();
        writeln!(s, "      <data key=\"type\">{}</data>", xml_escape(&n.node_type)).unwrap();
        for (k, v) in &n.attrs {
            writeln!(s, "      <data key=\"n_{}\">{}</data>", xml_escape(k), xml_escape(v)).unwrap();
        }
        s.push_str("    </node>\n");
    }
    for e in g.edges() {
        writeln!(
            s,
            "    <edge id=\"{}\" source=\"{}\" target=\"{}\">",
            xml_escape(&e.edge_id),
            xml_escape(&e.source),
            xml_escape(&e.target)
        )
        .unwrap();
        writeln!(s, "      <data key=\"relationship\">{}</data>", xml_escape(&e.relationship)).unwrap();
        writeln!(s, "      <data key=\"text\">{}</data>", xml_escape(&e.text)).unwrap();
        for (k, v) in &e.attrs {
            writeln!(s, "      <data key=\"e_{}\">{}</data>", xml_escape(k), xml_escape(v)).unwrap();
        }
        s.push_str("    </edge>\n");
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}
