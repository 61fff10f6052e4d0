use rand::seq::index::sample;
use rand::Rng;

use super::{ClusterAssignment, ClusterError, ClusterMethod, ClusterParams};
use crate::points::{seeded_rng, sq_dist, streams, Points};

const MB_MAX_EPOCHS: usize = 100;
const MB_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Points,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after every assignment step of the winning run (Lloyd only).
    pub inertia_trace: Vec<f64>,
}

/// Nearest centroid and its squared distance; ties go to the lower index.
fn nearest(row: &[f64], centroids: &Points) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.rows().enumerate() {
        let d = sq_dist(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign(x: &Points, centroids: &Points) -> (Vec<usize>, f64) {
    let mut total = 0.0;
    let labels = x
        .rows()
        .map(|r| {
            let (c, d) = nearest(r, centroids);
            total += d;
            c
        })
        .collect();
    (labels, total)
}

/// Sum of squared distances to assigned centroids.
pub fn inertia(x: &Points, centroids: &Points, labels: &[usize]) -> f64 {
    x.rows().zip(labels).map(|(r, &c)| sq_dist(r, centroids.row(c))).sum()
}

/// Greedy k-means++ seeding: each new center is the best of `2 + ln k`
/// D²-weighted candidates.
pub fn kmeans_plus_plus(x: &Points, k: usize, rng: &mut impl Rng) -> Points {
    let n = x.len();
    let dim = x.dim();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centers = Points::zeros(k, dim);
    let mut chosen = vec![false; n];

    let first = rng.random_range(0..n);
    centers.row_mut(0).copy_from_slice(x.row(first));
    chosen[first] = true;
    let mut closest: Vec<f64> = x.rows().map(|r| sq_dist(r, x.row(first))).collect();

    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut best: Option<(usize, f64, Vec<f64>)> = None;
            for _ in 0..trials {
                let target = rng.random::<f64>() * total;
                let mut cum = 0.0;
                let mut candidate = n - 1;
                for (i, &w) in closest.iter().enumerate() {
                    cum += w;
                    if cum > target {
                        candidate = i;
                        break;
                    }
                }
                let updated: Vec<f64> =
                    x.rows().zip(&closest).map(|(r, &d)| d.min(sq_dist(r, x.row(candidate)))).collect();
                let potential: f64 = updated.iter().sum();
                if best.as_ref().is_none_or(|b| potential < b.1) {
                    best = Some((candidate, potential, updated));
                }
            }
            let (idx, _, updated) = best.expect("at least one trial");
            closest = updated;
            idx
        } else {
            // every point coincides with a center already
            let idx = chosen.iter().position(|&c| !c).unwrap_or(0);
            for (d, r) in closest.iter_mut().zip(x.rows()) {
                *d = d.min(sq_dist(r, x.row(idx)));
            }
            idx
        };
        chosen[pick] = true;
        centers.row_mut(c).copy_from_slice(x.row(pick));
    }
    centers
}

fn check_k(x: &Points, k: usize) -> Result<(), ClusterError> {
    if k == 0 {
        return Err(ClusterError::InvalidParams("k must be >= 1".into()));
    }
    if x.len() < k {
        return Err(ClusterError::TooFewPoints { needed: k, got: x.len() });
    }
    Ok(())
}

/// Full-batch Lloyd iterations from `n_init` k-means++ starts; the lowest
/// inertia wins (earliest on ties).
pub fn kmeans_lloyd(
    x: &Points,
    k: usize,
    n_init: usize,
    max_iter: usize,
    rng: &mut impl Rng,
) -> Result<KMeansFit, ClusterError> {
    check_k(x, k)?;
    let mut best: Option<KMeansFit> = None;
    for _ in 0..n_init.max(1) {
        let mut centroids = kmeans_plus_plus(x, k, rng);
        let mut trace = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        let mut iterations = 0;
        for _ in 0..max_iter.max(1) {
            iterations += 1;
            let (next, total) = assign(x, &centroids);
            trace.push(total);
            if next == labels {
                break;
            }
            labels = next;
            let mut sums = Points::zeros(k, x.dim());
            let mut counts = vec![0usize; k];
            for (r, &c) in x.rows().zip(&labels) {
                counts[c] += 1;
                for (s, v) in sums.row_mut(c).iter_mut().zip(r) {
                    *s += v;
                }
            }
            for c in 0..k {
                if counts[c] > 0 {
                    let inv = 1.0 / counts[c] as f64;
                    for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                        *dst = s * inv;
                    }
                }
            }
        }
        let (labels, total) = assign(x, &centroids);
        let fit = KMeansFit { centroids, labels, inertia: total, iterations, inertia_trace: trace };
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

/// Mini-batch k-means with per-centroid learning rate `1 / count`.
///
/// Each epoch draws `ceil(n / b)` batches of `b = min(batch_size, n)` points
/// without replacement. Stops after 100 epochs or when no centroid moved more
/// than 1e-6 during an epoch.
pub fn minibatch_kmeans_fit(x: &Points, p: &ClusterParams) -> Result<KMeansFit, ClusterError> {
    p.validate()?;
    check_k(x, p.k)?;
    let n = x.len();
    let mut rng = seeded_rng(p.seed, streams::MINIBATCH);
    let mut centroids = kmeans_plus_plus(x, p.k, &mut rng);
    let mut counts = vec![0u64; p.k];
    let batch = p.batch_size.min(n);
    let steps = n.div_ceil(batch);
    let mut iterations = 0;

    for _ in 0..MB_MAX_EPOCHS {
        iterations += 1;
        let before = centroids.clone();
        for _ in 0..steps {
            let idx = sample(&mut rng, n, batch).into_vec();
            let cached: Vec<usize> = idx.iter().map(|&i| nearest(x.row(i), &centroids).0).collect();
            for (&i, &c) in idx.iter().zip(&cached) {
                counts[c] += 1;
                let eta = 1.0 / counts[c] as f64;
                for (v, xi) in centroids.row_mut(c).iter_mut().zip(x.row(i)) {
                    *v = (1.0 - eta) * *v + eta * xi;
                }
            }
        }
        let drift = (0..p.k).map(|c| sq_dist(before.row(c), centroids.row(c)).sqrt()).fold(0.0, f64::max);
        if drift < MB_DRIFT_TOL {
            break;
        }
    }
    let (labels, total) = assign(x, &centroids);
    Ok(KMeansFit { centroids, labels, inertia: total, iterations, inertia_trace: Vec::new() })
}

pub fn minibatch_kmeans(x: &Points, p: &ClusterParams) -> Result<ClusterAssignment, ClusterError> {
    let fit = minibatch_kmeans_fit(x, p)?;
    let raw: Vec<i64> = fit.labels.iter().map(|&l| l as i64).collect();
    Ok(ClusterAssignment::new(&raw, ClusterMethod::Mbkmeans, p.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Points {
        Points::from_rows(&[[0.0, 0.0], [1.0, 0.5], [3.0, 3.0], [7.0, 1.0], [2.0, 9.0], [4.0, 4.0], [5.5, 0.5]])
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let x = pts();
        let p = ClusterParams { k: x.len(), seed: 3, ..Default::default() };
        let fit = minibatch_kmeans_fit(&x, &p).unwrap();
        assert_eq!(fit.inertia, 0.0);
        let a = minibatch_kmeans(&x, &p).unwrap();
        assert_eq!(a.k_found(), x.len());
    }

    #[test]
    fn k_one_gives_mean() {
        let x = pts();
        let fit = minibatch_kmeans_fit(&x, &ClusterParams { k: 1, ..Default::default() }).unwrap();
        let n = x.len() as f64;
        for a in 0..2 {
            let mean: f64 = x.rows().map(|r| r[a]).sum::<f64>() / n;
            assert!((fit.centroids.row(0)[a] - mean).abs() < 1e-12);
        }
        assert!(fit.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn too_few_points() {
        let x = pts();
        assert_eq!(
            minibatch_kmeans(&x, &ClusterParams { k: 8, ..Default::default() }),
            Err(ClusterError::TooFewPoints { needed: 8, got: 7 })
        );
    }

    #[test]
    fn plus_plus_picks_distinct_points() {
        let x = pts();
        let mut rng = seeded_rng(1, 0);
        let c = kmeans_plus_plus(&x, 7, &mut rng);
        let mut rows: Vec<Vec<f64>> = c.to_rows();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.dedup();
        assert_eq!(rows.len(), 7);
    }

    #[test]
    fn duplicates_do_not_stall_seeding() {
        let x = Points::from_rows(&[[1.0, 1.0]; 4]);
        let mut rng = seeded_rng(1, 0);
        let c = kmeans_plus_plus(&x, 3, &mut rng);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn lloyd_inertia_never_increases() {
        let x = pts();
        let mut rng = seeded_rng(9, 0);
        let fit = kmeans_lloyd(&x, 3, 5, 100, &mut rng).unwrap();
        for w in fit.inertia_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}
