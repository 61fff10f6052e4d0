use std::collections::VecDeque;

use super::{ClusterAssignment, ClusterError, ClusterMethod, ClusterParams};
use crate::points::Points;

/// DBSCAN labels (−1 = noise).
///
/// A point is core when at least `min_pts` points, itself included, lie within
/// `eps`. Clusters are grown from unlabeled core points in ascending index
/// order; a border point joins the first cluster that reaches it.
pub fn dbscan_labels(x: &Points, eps: f64, min_pts: usize) -> Vec<i64> {
    let n = x.len();
    let eps2 = eps * eps;
    let neighbors: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| x.sq_dist(i, j) <= eps2).collect()).collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels = vec![-1i64; n];
    let mut next = 0i64;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] >= 0 || !core[start] {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbors[p] {
                if labels[q] < 0 {
                    labels[q] = next;
                    if core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
        next += 1;
    }
    labels
}

pub fn dbscan(x: &Points, p: &ClusterParams) -> Result<ClusterAssignment, ClusterError> {
    p.validate()?;
    Ok(ClusterAssignment::new(&dbscan_labels(x, p.eps, p.min_pts), ClusterMethod::Dbscan, p.clone()))
}
