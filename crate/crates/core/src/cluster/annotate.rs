use std::collections::{BTreeMap, HashMap, HashSet};

use super::text::tokenize;
use super::{ClusterAssignment, ClusterError};
use crate::graph::PolicyGraph;

/// Top `top_n` terms per cluster by TF-IDF over node labels, where each
/// cluster is one document: `tf = count / total tokens`, `idf = ln(C / df)`.
/// Ties are broken alphabetically. Noise is not annotated.
pub fn annotate_clusters(
    assignment: &ClusterAssignment,
    g: &PolicyGraph,
    top_n: usize,
) -> Result<BTreeMap<i32, Vec<String>>, ClusterError> {
    if assignment.len() != g.node_count() {
        return Err(ClusterError::Misaligned { expected: g.node_count(), got: assignment.len() });
    }
    let mut counts: BTreeMap<i32, HashMap<String, usize>> = BTreeMap::new();
    for (node, &label) in g.nodes().iter().zip(assignment.labels()) {
        if label < 0 {
            continue;
        }
        let bag = counts.entry(label).or_default();
        for t in tokenize(&node.label) {
            *bag.entry(t).or_default() += 1;
        }
    }
    let n_clusters = counts.len() as f64;
    let mut df: HashMap<&str, usize> = HashMap::new();
    for bag in counts.values() {
        let terms: HashSet<&str> = bag.keys().map(String::as_str).collect();
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut out = BTreeMap::new();
    for (&label, bag) in &counts {
        let total: usize = bag.values().sum();
        let mut scored: Vec<(f64, &str)> = bag
            .iter()
            .map(|(t, &c)| {
                let tf = c as f64 / total as f64;
                (tf * (n_clusters / df[t.as_str()] as f64).ln(), t.as_str())
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        out.insert(label, scored.into_iter().take(top_n).map(|(_, t)| t.to_string()).collect());
    }
    Ok(out)
}
