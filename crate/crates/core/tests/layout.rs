use ppkg_core::embed::{spring_layout, LayoutParams};
use ppkg_core::graph::{PolicyEdge, PolicyGraph, PolicyNode};
use ppkg_core::points::seeded_rng;
use rand::Rng;

fn random_tree(seed: u64) -> PolicyGraph {
    let mut rng = seeded_rng(seed, 42);
    let n = rng.random_range(5..=50);
    let nodes = (0..n)
        .map(|i| PolicyNode { id: format!("v{i}"), label: String::new(), node_type: String::new(), attrs: Default::default() })
        .collect();
    let edges = (1..n)
        .map(|i| PolicyEdge {
            source: format!("v{}", rng.random_range(0..i)),
            target: format!("v{i}"),
            relationship: String::new(),
            text: String::new(),
            edge_id: format!("e{i}"),
            attrs: Default::default(),
        })
        .collect();
    PolicyGraph::from_parts(nodes, edges).unwrap()
}

#[test]
fn tree_neighbors_sit_closer_than_average() {
    let mut successes = 0;
    for seed in 0..20 {
        let g = random_tree(seed);
        let emb = spring_layout(&g, &LayoutParams { seed, ..Default::default() }).unwrap();
        let p = emb.points();
        let n = p.len();
        let mut all = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                all += p.dist(i, j);
            }
        }
        let mean_all = all / (n * (n - 1) / 2) as f64;
        let adj = g.edge_indices();
        let mean_edge = adj.iter().map(|&(s, t)| p.dist(s, t)).sum::<f64>() / adj.len() as f64;
        if mean_edge < mean_all {
            successes += 1;
        }
    }
    assert!(successes >= 16, "only {successes}/20 trees satisfied the property");
}
