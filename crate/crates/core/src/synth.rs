//! Seeded synthetic inputs: labeled point sets and policy-like graphs for
//! benchmarks, demos and tests.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::graph::{PolicyEdge, PolicyGraph, PolicyNode, REL_COLLECT, REL_SUBSUM, TYPE_ACTOR, TYPE_DATA};
use crate::points::{seeded_rng, streams, Points};

/// Isotropic Gaussian blobs, `n_per` points around each center, grouped by
/// center in output order. Labels are center indices.
pub fn gaussian_blobs(centers: &[[f64; 2]], n_per: usize, sigma: f64, seed: u64) -> (Points, Vec<i64>) {
    let mut rng = seeded_rng(seed, streams::SYNTH);
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
    let mut data = Vec::with_capacity(centers.len() * n_per * 2);
    let mut labels = Vec::with_capacity(centers.len() * n_per);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..n_per {
            data.push(center[0] + normal.sample(&mut rng));
            data.push(center[1] + normal.sample(&mut rng));
            labels.push(c as i64);
        }
    }
    (Points::new(data, 2), labels)
}

/// Points on concentric circles with Gaussian radial jitter; labels are ring
/// indices.
pub fn concentric_rings(radii: &[f64], n_per: usize, noise: f64, seed: u64) -> (Points, Vec<i64>) {
    let mut rng = seeded_rng(seed, streams::SYNTH);
    let normal = Normal::new(0.0, noise).expect("noise must be finite and >= 0");
    let mut data = Vec::with_capacity(radii.len() * n_per * 2);
    let mut labels = Vec::with_capacity(radii.len() * n_per);
    for (ring, &r) in radii.iter().enumerate() {
        for i in 0..n_per {
            let theta = std::f64::consts::TAU * (i as f64 + rng.random::<f64>() * 0.5) / n_per as f64;
            let radius = r + normal.sample(&mut rng);
            data.push(radius * theta.cos());
            data.push(radius * theta.sin());
            labels.push(ring as i64);
        }
    }
    (Points::new(data, 2), labels)
}

const DATA_TERMS: &[&str] = &[
    "email", "phone", "address", "location", "gps", "device", "identifier", "cookie", "browsing", "history",
    "purchase", "payment", "card", "contact", "camera", "photo", "microphone", "calendar", "advertising", "profile",
    "age", "gender", "birthday", "ip", "wifi", "bluetooth", "sensor", "usage", "crash", "log",
];

const ACTORS: &[&str] = &["we", "advertisers", "analytics providers", "payment processors", "partners", "affiliates"];

fn node(id: String, label: String, node_type: &str) -> PolicyNode {
    PolicyNode { id, label, node_type: node_type.to_string(), attrs: Default::default() }
}

fn edge(i: usize, source: &PolicyNode, target: &PolicyNode, relationship: &str, text: String) -> PolicyEdge {
    PolicyEdge {
        source: source.id.clone(),
        target: target.id.clone(),
        relationship: relationship.to_string(),
        text,
        edge_id: format!("e{i}"),
        attrs: Default::default(),
    }
}

/// A policy-like graph with `n_nodes` nodes and `n_edges` distinct directed
/// edges (no self-loops). The first few nodes are actors that COLLECT data;
/// the rest are data types linked by SUBSUM.
pub fn random_policy_graph(n_nodes: usize, n_edges: usize, seed: u64) -> PolicyGraph {
    assert!(n_nodes >= 2 || n_edges == 0, "edges need two nodes");
    assert!(n_edges <= n_nodes * n_nodes.saturating_sub(1), "too many edges for a simple digraph");
    let mut rng = seeded_rng(seed, streams::SYNTH);
    let n_actors = (n_nodes / 20).clamp(1.min(n_nodes), ACTORS.len());
    let nodes: Vec<PolicyNode> = (0..n_nodes)
        .map(|i| {
            if i < n_actors {
                node(format!("n{i}"), ACTORS[i].to_string(), TYPE_ACTOR)
            } else {
                let a = DATA_TERMS.choose(&mut rng).unwrap();
                let b = DATA_TERMS.choose(&mut rng).unwrap();
                node(format!("n{i}"), format!("{a} {b}"), TYPE_DATA)
            }
        })
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(n_edges);
    while edges.len() < n_edges {
        let s = rng.random_range(0..n_nodes);
        let t = rng.random_range(0..n_nodes);
        if s == t || !seen.insert((s, t)) {
            continue;
        }
        let (src, dst) = (&nodes[s], &nodes[t]);
        let (rel, text) = if src.node_type == TYPE_ACTOR {
            (REL_COLLECT, format!("{} may collect your {}.", src.label, dst.label))
        } else {
            (REL_SUBSUM, format!("{} includes {}.", src.label, dst.label))
        };
        edges.push(edge(edges.len(), src, dst, rel, text));
    }
    PolicyGraph::from_parts(nodes, edges).expect("generated graph is well formed")
}

/// `n_communities` groups of `per_community` data nodes. Each group draws its
/// labels and edge text from its own disjoint slice of the vocabulary and is
/// internally connected as a ring with chords; consecutive groups share one
/// bridging edge. Returns the graph and the generating community per node.
pub fn community_graph(n_communities: usize, per_community: usize, seed: u64) -> (PolicyGraph, Vec<i64>) {
    assert!(n_communities >= 1 && per_community >= 3, "need at least one community of 3 nodes");
    let words_per = DATA_TERMS.len() / n_communities;
    assert!(words_per >= 2, "too many communities for the vocabulary");
    let mut rng = seeded_rng(seed, streams::SYNTH);
    let mut nodes = Vec::new();
    let mut truth = Vec::new();
    for c in 0..n_communities {
        let vocab = &DATA_TERMS[c * words_per..(c + 1) * words_per];
        for i in 0..per_community {
            let a = vocab.choose(&mut rng).unwrap();
            let b = vocab.choose(&mut rng).unwrap();
            nodes.push(node(format!("c{c}n{i}"), format!("{a} {b}"), TYPE_DATA));
            truth.push(c as i64);
        }
    }
    let mut edges = Vec::new();
    for c in 0..n_communities {
        let base = c * per_community;
        for i in 0..per_community {
            let j = (i + 1) % per_community;
            let k = rng.random_range(0..per_community);
            for t in [j, k] {
                if t != i {
                    let (s, d) = (&nodes[base + i], &nodes[base + t]);
                    let text = format!("{} includes {}.", s.label, d.label);
                    edges.push(edge(edges.len(), s, d, REL_SUBSUM, text));
                }
            }
        }
        if c + 1 < n_communities {
            let (s, d) = (&nodes[base], &nodes[base + per_community]);
            edges.push(edge(edges.len(), s, d, REL_SUBSUM, String::new()));
        }
    }
    (PolicyGraph::from_parts(nodes, edges).expect("generated graph is well formed"), truth)
}
