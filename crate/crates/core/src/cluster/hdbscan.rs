use super::{ClusterAssignment, ClusterError, ClusterMethod, ClusterParams};
use crate::points::Points;

#[derive(Debug, Clone, Copy)]
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

#[derive(Debug, Clone, Copy)]
struct CondensedEdge {
    parent: usize,
    child: usize,
    lambda: f64,
    child_size: usize,
}

fn lambda_of(distance: f64) -> f64 {
    1.0 / distance.max(1e-200)
}

/// Core distance: distance to the `min_samples`-th nearest point, self included.
fn core_distances(dist: &[f64], n: usize, min_samples: usize) -> Vec<f64> {
    let kth = min_samples.clamp(1, n) - 1;
    (0..n)
        .map(|i| {
            let mut row = dist[i * n..(i + 1) * n].to_vec();
            row.sort_by(f64::total_cmp);
            row[kth]
        })
        .collect()
}

/// Prim's MST over mutual reachability distances, edges sorted by weight.
fn mutual_reachability_mst(dist: &[f64], core: &[f64], n: usize) -> Vec<(usize, usize, f64)> {
    let mreach = |i: usize, j: usize| dist[i * n + j].max(core[i]).max(core[j]);
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for j in 0..n {
            if !in_tree[j] {
                let w = mreach(current, j);
                if w < best[j] {
                    best[j] = w;
                    from[j] = current;
                }
            }
        }
        let next = (0..n)
            .filter(|&j| !in_tree[j])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]).then(a.cmp(&b)))
            .expect("vertices remain");
        edges.push((from[next], next, best[next]));
        in_tree[next] = true;
        current = next;
    }
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    edges
}

/// Single-linkage dendrogram from sorted MST edges; node `n + i` is merge `i`.
fn single_linkage(edges: &[(usize, usize, f64)], n: usize) -> Vec<Merge> {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::with_capacity(edges.len());
    for (step, &(a, b, w)) in edges.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let node = n + step;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge { left: ra, right: rb, distance: w, size: size[node] });
    }
    merges
}

fn leaves_under(merges: &[Merge], n: usize, node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let m = merges[x - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
}

/// Prunes the dendrogram: splits where both sides hold at least
/// `min_cluster_size` points create new clusters; smaller sides fall out as
/// points. Cluster ids start at `n` (the root).
fn condense(merges: &[Merge], n: usize, min_cluster_size: usize) -> Vec<CondensedEdge> {
    let root = n + merges.len() - 1;
    let node_size = |x: usize| if x < n { 1 } else { merges[x - n].size };
    let mut relabel = vec![usize::MAX; n + merges.len()];
    relabel[root] = n;
    let mut next_label = n + 1;
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::from([root]);
    let mut fallen = Vec::new();

    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        let m = merges[node - n];
        let lambda = lambda_of(m.distance);
        let parent = relabel[node];
        let (ls, rs) = (node_size(m.left), node_size(m.right));
        let big_left = ls >= min_cluster_size;
        let big_right = rs >= min_cluster_size;
        for (child, child_size, big, other_big) in [(m.left, ls, big_left, big_right), (m.right, rs, big_right, big_left)] {
            if big && other_big {
                relabel[child] = next_label;
                next_label += 1;
                out.push(CondensedEdge { parent, child: relabel[child], lambda, child_size });
                queue.push_back(child);
            } else if big {
                relabel[child] = parent;
                queue.push_back(child);
            } else {
                fallen.clear();
                leaves_under(merges, n, child, &mut fallen);
                for &p in &fallen {
                    out.push(CondensedEdge { parent, child: p, lambda, child_size: 1 });
                }
            }
        }
    }
    out
}

/// Excess-of-mass selection over the condensed tree, root excluded.
fn select_clusters(tree: &[CondensedEdge], n: usize) -> Vec<usize> {
    let max_id = tree.iter().map(|e| e.parent.max(e.child)).max().unwrap_or(n);
    let count = max_id - n + 1;
    let mut birth = vec![0.0; count];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
    }
    let mut stability = vec![0.0; count];
    for e in tree {
        let c = e.parent - n;
        stability[c] += (e.lambda - birth[c]) * e.child_size as f64;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); count];
    for e in tree.iter().filter(|e| e.child >= n) {
        children[e.parent - n].push(e.child - n);
    }
    let mut selected = vec![true; count];
    selected[0] = false;
    for c in (1..count).rev() {
        let subtree: f64 = children[c].iter().map(|&ch| stability[ch]).sum();
        if subtree > stability[c] {
            selected[c] = false;
            stability[c] = subtree;
        } else {
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(children[d].iter().copied());
            }
        }
    }
    (1..count).filter(|&c| selected[c]).map(|c| c + n).collect()
}

/// HDBSCAN labels (−1 = noise): mutual reachability MST, condensed tree with
/// `min_cluster_size`, excess-of-mass selection. Fewer than
/// `2 * min_cluster_size` points gives all noise.
pub fn hdbscan_labels(x: &Points, min_cluster_size: usize, min_samples: usize) -> Vec<i64> {
    let n = x.len();
    if n < 2 || n < 2 * min_cluster_size {
        return vec![-1; n];
    }
    let dist = x.distance_matrix();
    let core = core_distances(&dist, n, min_samples);
    let mst = mutual_reachability_mst(&dist, &core, n);
    let merges = single_linkage(&mst, n);
    let tree = condense(&merges, n, min_cluster_size.max(2));
    let selected = select_clusters(&tree, n);

    let mut cluster_parent = std::collections::HashMap::new();
    let mut point_parent = vec![usize::MAX; n];
    for e in &tree {
        if e.child >= n {
            cluster_parent.insert(e.child, e.parent);
        } else {
            point_parent[e.child] = e.parent;
        }
    }
    (0..n)
        .map(|p| {
            let mut c = point_parent[p];
            loop {
                if let Some(rank) = selected.iter().position(|&s| s == c) {
                    return rank as i64;
                }
                match cluster_parent.get(&c) {
                    Some(&up) => c = up,
                    None => return -1,
                }
            }
        })
        .collect()
}

pub fn hdbscan(x: &Points, p: &ClusterParams) -> Result<ClusterAssignment, ClusterError> {
    p.validate()?;
    let labels = hdbscan_labels(x, p.min_cluster_size, p.min_samples());
    Ok(ClusterAssignment::new(&labels, ClusterMethod::Hdbscan, p.clone()))
}
