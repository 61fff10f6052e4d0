use nalgebra::{DMatrix, SymmetricEigen};

use super::kmeans::kmeans_lloyd;
use super::{Affinity, ClusterAssignment, ClusterError, ClusterMethod, ClusterParams};
use crate::points::{seeded_rng, streams, Points};

const ISOLATED_LOOP: f64 = 1e-12;
const N_INIT: usize = 10;
const MAX_ITER: usize = 300;

/// Dense `exp(-gamma * d²)` affinity with a zero diagonal.
pub fn rbf_affinity(x: &Points, gamma: f64) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (-gamma * x.sq_dist(i, j)).exp() })
}

/// Symmetrized `m`-nearest-neighbor connectivity, `0.5 * (A + Aᵀ)`.
pub fn knn_affinity(x: &Points, m: usize) -> DMatrix<f64> {
    let n = x.len();
    let m = m.min(n.saturating_sub(1));
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (x.sq_dist(i, j), j)).collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in others.iter().take(m) {
            a[(i, j)] = 1.0;
        }
    }
    (&a + a.transpose()) * 0.5
}

/// `I - D^{-1/2} W D^{-1/2}`. Vertices with zero degree get a tiny self-loop
/// first so the normalization stays finite.
pub fn normalized_laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut w = w.clone();
    let mut isolated = 0;
    for i in 0..n {
        if w.row(i).sum() <= 0.0 {
            w[(i, i)] = ISOLATED_LOOP;
            isolated += 1;
        }
    }
    if isolated > 0 {
        log::info!("spectral: {isolated} isolated vertices given a self-loop");
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / w.row(i).sum().sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]
    })
}

/// Rows of the `k` eigenvectors with smallest eigenvalues, each row scaled to
/// unit length.
pub fn spectral_embedding(laplacian: &DMatrix<f64>, k: usize) -> Points {
    let n = laplacian.nrows();
    let eig = SymmetricEigen::new(laplacian.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let mut out = Points::zeros(n, k);
    for i in 0..n {
        let row = out.row_mut(i);
        for (c, &e) in order.iter().take(k).enumerate() {
            row[c] = eig.eigenvectors[(i, e)];
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    out
}

/// Spectral clustering of a precomputed affinity matrix.
pub fn spectral_from_affinity(w: &DMatrix<f64>, k: usize, seed: u64) -> Result<Vec<usize>, ClusterError> {
    let n = w.nrows();
    if k == 0 {
        return Err(ClusterError::InvalidParams("k must be >= 1".into()));
    }
    if n < k {
        return Err(ClusterError::TooFewPoints { needed: k, got: n });
    }
    let emb = spectral_embedding(&normalized_laplacian(w), k);
    let mut rng = seeded_rng(seed, streams::SPECTRAL);
    Ok(kmeans_lloyd(&emb, k, N_INIT, MAX_ITER, &mut rng)?.labels)
}

pub fn spectral(x: &Points, p: &ClusterParams) -> Result<ClusterAssignment, ClusterError> {
    p.validate()?;
    let w = match p.affinity {
        Affinity::Rbf { gamma } => rbf_affinity(x, gamma),
        Affinity::Knn { m } => knn_affinity(x, m),
    };
    let labels = spectral_from_affinity(&w, p.k, p.seed)?;
    let raw: Vec<i64> = labels.iter().map(|&l| l as i64).collect();
    Ok(ClusterAssignment::new(&raw, ClusterMethod::Spectral, p.clone()))
}
