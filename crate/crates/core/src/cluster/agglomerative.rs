use super::{ClusterAssignment, ClusterError, ClusterMethod, ClusterParams, Linkage};
use crate::points::Points;

/// Bottom-up merging with Lance–Williams updates until `k` clusters remain.
///
/// Clusters are identified by their lowest member index. Among pairs at the
/// minimal distance the lexicographically smallest `(lower id, higher id)` is
/// merged. Ward works on squared Euclidean distances, the other linkages on
/// plain Euclidean distances. Returns each point's cluster id.
pub fn agglomerative_labels(x: &Points, k: usize, linkage: Linkage) -> Result<Vec<usize>, ClusterError> {
    let n = x.len();
    if k == 0 {
        return Err(ClusterError::InvalidParams("k must be >= 1".into()));
    }
    if n < k {
        return Err(ClusterError::TooFewPoints { needed: k, got: n });
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match linkage {
                Linkage::Ward => x.sq_dist(i, j),
                _ => x.dist(i, j),
            };
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut remaining = n;

    while remaining > k {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for i in (0..n).filter(|&i| active[i]) {
            let row = &d[i * n..(i + 1) * n];
            for j in (i + 1)..n {
                if active[j] && row[j] < best.0 {
                    best = (row[j], i, j);
                }
            }
        }
        let (dij, i, j) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for m in (0..n).filter(|&m| active[m] && m != i && m != j) {
            let (dim, djm) = (d[i * n + m], d[j * n + m]);
            let nm = size[m] as f64;
            let v = match linkage {
                Linkage::Single => dim.min(djm),
                Linkage::Complete => dim.max(djm),
                Linkage::Average => (ni * dim + nj * djm) / (ni + nj),
                Linkage::Ward => ((ni + nm) * dim + (nj + nm) * djm - nm * dij) / (ni + nj + nm),
            };
            d[i * n + m] = v;
            d[m * n + i] = v;
        }
        size[i] += size[j];
        active[j] = false;
        for o in owner.iter_mut() {
            if *o == j {
                *o = i;
            }
        }
        remaining -= 1;
    }
    Ok(owner)
}

pub fn agglomerative(x: &Points, p: &ClusterParams) -> Result<ClusterAssignment, ClusterError> {
    p.validate()?;
    let owner = agglomerative_labels(x, p.k, p.linkage)?;
    let raw: Vec<i64> = owner.iter().map(|&o| o as i64).collect();
    Ok(ClusterAssignment::new(&raw, ClusterMethod::Agglomerative, p.clone()))
}
