use std::collections::BTreeMap;

use ppkg_core::cluster::{
    dbscan_labels, kmeans_lloyd, minibatch_kmeans, minibatch_kmeans_fit, spectral_embedding, normalized_laplacian,
    rbf_affinity, ClusterParams, LdaModel,
};
use ppkg_core::dimred::{joint_probabilities, kl_divergence, pca, tsne, umap, TsneParams, UmapParams};
use ppkg_core::embed::{spring_layout, EmbeddingMatrix, LayoutParams};
use ppkg_core::graph::{
    degree_summary, export_graph_json, parse_graph_json, parse_graphml, write_graphml, PolicyEdge, PolicyGraph,
    PolicyNode,
};
use ppkg_core::points::{seeded_rng, sq_dist, Points};
use ppkg_core::validate::{adjusted_rand, davies_bouldin, silhouette};
use proptest::prelude::*;

fn graph_strategy(max_nodes: usize, max_edges: usize) -> impl Strategy<Value = PolicyGraph> {
    (1..=max_nodes)
        .prop_flat_map(move |n| {
            (
                proptest::collection::vec(("[a-zA-Z &<>\"']{0,10}", "(DATA|ACTOR|)"), n),
                proptest::collection::vec((0..n, 0..n, "(COLLECT|SUBSUM)", "[ -~]{0,30}"), 0..=max_edges),
                proptest::collection::btree_map("[a-z]{1,5}", "[a-z0-9 ]{0,5}", 0..2),
            )
        })
        .prop_map(|(nodes, edges, extra)| {
            let nodes: Vec<PolicyNode> = nodes
                .into_iter()
                .enumerate()
                .map(|(i, (label, node_type))| PolicyNode {
                    id: format!("n{i}"),
                    label,
                    node_type,
                    attrs: if i == 0 { extra.clone() } else { BTreeMap::new() },
                })
                .collect();
            let edges = edges
                .into_iter()
                .enumerate()
                .map(|(i, (s, t, rel, text))| PolicyEdge {
                    source: format!("n{s}"),
                    target: format!("n{t}"),
                    relationship: rel,
                    text,
                    edge_id: format!("e{i}"),
                    attrs: BTreeMap::new(),
                })
                .collect();
            PolicyGraph::from_parts(nodes, edges).unwrap()
        })
}

fn points_strategy(min_n: usize, max_n: usize) -> impl Strategy<Value = Points> {
    proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), min_n..=max_n)
        .prop_map(|v| Points::from_rows(&v.into_iter().map(|(a, b)| [a, b]).collect::<Vec<_>>()))
}

fn labeled_points(k_max: i32) -> impl Strategy<Value = (Points, Vec<i32>)> {
    points_strategy(4, 40).prop_flat_map(move |p| {
        let n = p.len();
        (Just(p), proptest::collection::vec(0..k_max, n)).prop_map(|(p, mut l)| {
            // at least two clusters
            l[0] = 0;
            l[1] = 1;
            (p, l)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_sum_is_twice_edge_count(g in graph_strategy(15, 40)) {
        let d = degree_summary(&g);
        prop_assert_eq!(d.total(), 2 * g.edge_count());
    }

    #[test]
    fn export_then_parse_is_identity(g in graph_strategy(15, 30)) {
        let json = export_graph_json(&g, &degree_summary(&g));
        prop_assert_eq!(parse_graph_json(&json).unwrap(), g.clone());
        let xml = write_graphml(&g);
        let reparsed = parse_graphml(xml.as_bytes()).unwrap();
        prop_assert_eq!(&reparsed, &g);
        prop_assert_eq!(export_graph_json(&reparsed, &degree_summary(&reparsed)), json);
    }

    #[test]
    fn ari_symmetric_and_relabel_invariant(
        a in proptest::collection::vec(0i64..4, 2..40),
        seed in any::<u64>(),
    ) {
        let mut rng = seeded_rng(seed, 0);
        let b: Vec<i64> = a.iter().map(|_| rand::Rng::random_range(&mut rng, 0..3)).collect();
        let ab = adjusted_rand(&a, &b).unwrap();
        prop_assert!((ab - adjusted_rand(&b, &a).unwrap()).abs() < 1e-12);
        let renamed: Vec<i64> = a.iter().map(|&x| 10 - 3 * x).collect();
        prop_assert!((adjusted_rand(&renamed, &b).unwrap() - ab).abs() < 1e-12);
        prop_assert_eq!(adjusted_rand(&a, &renamed).unwrap(), 1.0);
    }

    #[test]
    fn metrics_invariant_under_rigid_motion_and_scaling(
        (p, labels) in labeled_points(4),
        theta in 0.0f64..6.28,
        shift in (-50.0f64..50.0, -50.0f64..50.0),
        scale in 0.1f64..10.0,
    ) {
        let (c, s) = (theta.cos(), theta.sin());
        let moved = Points::from_rows(
            &p.rows().map(|r| [scale * (c * r[0] - s * r[1]) + shift.0, scale * (s * r[0] + c * r[1]) + shift.1]).collect::<Vec<_>>(),
        );
        let s0 = silhouette(&p, &labels).unwrap();
        let d0 = davies_bouldin(&p, &labels).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s0));
        prop_assert!((silhouette(&moved, &labels).unwrap() - s0).abs() < 1e-9);
        let d1 = davies_bouldin(&moved, &labels).unwrap();
        prop_assert!((d1 - d0).abs() < 1e-8 * (1.0 + d0.abs()));
        let permuted: Vec<i32> = labels.iter().map(|&l| (l + 1) % 4).collect();
        prop_assert!((silhouette(&p, &permuted).unwrap() - s0).abs() < 1e-12);
        prop_assert!((davies_bouldin(&p, &permuted).unwrap() - d0).abs() < 1e-12);
    }

    #[test]
    fn duplicating_points_keeps_dbi((p, labels) in labeled_points(3)) {
        let rows: Vec<Vec<f64>> = p.to_rows().into_iter().chain(p.to_rows()).collect();
        let doubled = Points::from_rows(&rows);
        let l2: Vec<i32> = labels.iter().chain(&labels).copied().collect();
        let d0 = davies_bouldin(&p, &labels).unwrap();
        prop_assert!((davies_bouldin(&doubled, &l2).unwrap() - d0).abs() < 1e-9 * (1.0 + d0));
    }

    #[test]
    fn tsne_joint_probabilities_normalized(p in points_strategy(5, 30), perp in 2.0f64..8.0) {
        let n = p.len();
        let perp = perp.min((n as f64 - 1.0) / 3.0);
        let (joint, _) = joint_probabilities(&p, perp).unwrap();
        prop_assert!((joint.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..n {
            prop_assert_eq!(joint[i * n + i], 0.0);
            for j in 0..n {
                prop_assert!(joint[i * n + j] >= 0.0);
                prop_assert_eq!(joint[i * n + j], joint[j * n + i]);
            }
        }
    }

    #[test]
    fn kl_nonnegative(raw_p in proptest::collection::vec(0.0f64..1.0, 2..30), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 0);
        let raw_q: Vec<f64> = raw_p.iter().map(|_| rand::Rng::random_range(&mut rng, 1e-6..1.0)).collect();
        let sp: f64 = raw_p.iter().sum();
        prop_assume!(sp > 0.0);
        let sq: f64 = raw_q.iter().sum();
        let p: Vec<f64> = raw_p.iter().map(|v| v / sp).collect();
        let q: Vec<f64> = raw_q.iter().map(|v| v / sq).collect();
        prop_assert!(kl_divergence(&p, &q) >= -1e-12);
    }

    #[test]
    fn kmeans_points_nearest_to_own_centroid(p in points_strategy(3, 60), k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(p.len() >= k);
        let params = ClusterParams { k, seed, batch_size: 16, ..Default::default() };
        let fit = minibatch_kmeans_fit(&p, &params).unwrap();
        for (r, &l) in p.rows().zip(&fit.labels) {
            let own = sq_dist(r, fit.centroids.row(l));
            for c in fit.centroids.rows() {
                prop_assert!(own <= sq_dist(r, c) + 1e-9);
            }
        }
        let a = minibatch_kmeans(&p, &params).unwrap();
        prop_assert_eq!(&a, &minibatch_kmeans(&p, &params).unwrap());
        let mut seen = -1;
        for &l in a.labels() {
            prop_assert!(l >= 0 && (l as usize) < a.k_found());
            prop_assert!(l <= seen + 1);
            seen = seen.max(l);
        }
    }

    #[test]
    fn dbscan_core_partition_permutation_invariant(
        p in points_strategy(5, 50),
        eps in 5.0f64..40.0,
        min_pts in 2usize..5,
        seed in any::<u64>(),
    ) {
        let n = p.len();
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut seeded_rng(seed, 0));
        let shuffled = Points::from_rows(&perm.iter().map(|&i| p.row(i).to_vec()).collect::<Vec<_>>());
        let a = dbscan_labels(&p, eps, min_pts);
        let b_shuffled = dbscan_labels(&shuffled, eps, min_pts);
        let mut b = vec![0; n];
        for (pos, &orig) in perm.iter().enumerate() {
            b[orig] = b_shuffled[pos];
        }
        let core: Vec<usize> = (0..n)
            .filter(|&i| (0..n).filter(|&j| p.dist(i, j) <= eps).count() >= min_pts)
            .collect();
        for &i in &core {
            prop_assert!(a[i] >= 0 && b[i] >= 0);
            for &j in &core {
                prop_assert_eq!(a[i] == a[j], b[i] == b[j]);
            }
        }
        for i in 0..n {
            prop_assert_eq!(a[i] < 0, b[i] < 0);
        }
    }

    #[test]
    fn lda_counts_stay_consistent(
        docs in proptest::collection::vec(proptest::collection::vec("(aa|bb|cc|dd|ee)", 0..6), 1..8),
        topics in 1usize..4,
        seed in any::<u64>(),
    ) {
        prop_assume!(docs.iter().any(|d| !d.is_empty()));
        let mut m = LdaModel::new(&docs, topics, 0.1, 0.05, seed).unwrap();
        for _ in 0..5 {
            m.sweep();
            prop_assert!(m.counts_consistent());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn layout_is_deterministic_and_normalized(g in graph_strategy(20, 30), seed in any::<u64>()) {
        let p = LayoutParams { seed, iterations: 30, ..Default::default() };
        let a = spring_layout(&g, &p).unwrap();
        prop_assert_eq!(&a, &spring_layout(&g, &p).unwrap());
        let pts = a.points();
        if g.node_count() >= 2 {
            for axis in 0..pts.dim() {
                let max = pts.rows().map(|r| r[axis].abs()).fold(0.0, f64::max);
                prop_assert!((max - 1.0).abs() < 1e-12, "axis {} max {}", axis, max);
            }
        }
    }

    #[test]
    fn projections_deterministic_and_aligned(p in points_strategy(8, 30), seed in any::<u64>()) {
        let ids: Vec<String> = (0..p.len()).map(|i| format!("v{i}")).collect();
        let x = EmbeddingMatrix::new(p.clone(), ids.clone()).unwrap();
        let tp = TsneParams { perplexity: 2.0, n_iter: 250, seed, ..Default::default() };
        let t1 = tsne(&x, &tp).unwrap();
        prop_assert_eq!(&t1.projection, &tsne(&x, &tp).unwrap().projection);
        prop_assert!(t1.kl_trace.iter().all(|&(_, kl)| kl >= -1e-12));
        let up = UmapParams { n_neighbors: 4, n_epochs: 50, seed, ..Default::default() };
        let u1 = umap(&x, &up).unwrap();
        prop_assert_eq!(&u1.projection, &umap(&x, &up).unwrap().projection);
        let pc = pca(&x, 2).unwrap();
        for proj in [&t1.projection, &u1.projection, &pc.projection] {
            prop_assert_eq!(proj.node_order(), ids.as_slice());
            prop_assert_eq!(proj.len(), p.len());
        }
    }

    #[test]
    fn lloyd_inertia_monotone_on_spectral_rows(p in points_strategy(6, 40), seed in any::<u64>()) {
        let emb = spectral_embedding(&normalized_laplacian(&rbf_affinity(&p, 1e-3)), 3);
        let fit = kmeans_lloyd(&emb, 3, 10, 300, &mut seeded_rng(seed, 0)).unwrap();
        for w in fit.inertia_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }
}
