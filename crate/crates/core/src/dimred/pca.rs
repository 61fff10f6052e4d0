use nalgebra::{DMatrix, SymmetricEigen};

use super::{DimRedError, DrParams, Projection};
use crate::embed::EmbeddingMatrix;
use crate::points::Points;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaOutput {
    pub projection: Projection,
    /// Eigenvalues of the sample covariance (`1/(n-1)`), descending.
    pub explained_variance: Vec<f64>,
    /// Unit principal directions, one per output column.
    pub components: Vec<Vec<f64>>,
}

/// Projects onto the top `out_dim` principal directions of the mean-centered
/// data. Each direction's largest-magnitude loading is made positive.
pub fn pca(x: &EmbeddingMatrix, out_dim: usize) -> Result<PcaOutput, DimRedError> {
    let (points, explained_variance, components) = pca_points(x.points(), out_dim)?;
    Ok(PcaOutput {
        projection: Projection::new(points, DrParams::Pca { out_dim }, x.node_order().to_vec()),
        explained_variance,
        components,
    })
}

/// Raw PCA on a point set: `(scores, explained_variance, components)`.
pub fn pca_points(x: &Points, out_dim: usize) -> Result<(Points, Vec<f64>, Vec<Vec<f64>>), DimRedError> {
    let n = x.len();
    let d = x.dim();
    if n < 2 {
        return Err(DimRedError::DegenerateInput(format!("PCA needs at least 2 points, got {n}")));
    }
    if out_dim == 0 || out_dim > n.min(d) {
        return Err(DimRedError::InvalidParams(format!("out_dim {out_dim} must be in 1..={}", n.min(d))));
    }

    let mut mean = vec![0.0; d];
    for r in x.rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, d, |i, j| x.row(i)[j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(out_dim);
    let mut explained = Vec::with_capacity(out_dim);
    for &c in order.iter().take(out_dim) {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let pivot = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained.push(eig.eigenvalues[c].max(0.0));
    }

    let mut scores = Points::zeros(n, out_dim);
    for i in 0..n {
        let row = scores.row_mut(i);
        for (c, comp) in components.iter().enumerate() {
            row[c] = (0..d).map(|j| centered[(i, j)] * comp[j]).sum();
        }
    }
    Ok((scores, explained, components))
}
