use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{pca_points, DimRedError, DrParams, Projection};
use crate::embed::EmbeddingMatrix;
use crate::points::{seeded_rng, streams, Points};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmapParams {
    /// Neighbors per point, self excluded. Clamped to `n - 1`.
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub n_epochs: usize,
    pub seed: u64,
}

impl Default for UmapParams {
    fn default() -> Self {
        Self { n_neighbors: 15, min_dist: 0.1, n_epochs: 500, seed: 0 }
    }
}

const SPREAD: f64 = 1.0;
const NEGATIVE_SAMPLE_RATE: f64 = 5.0;
const INITIAL_ALPHA: f64 = 1.0;
const INIT_EXTENT: f64 = 10.0;
const SIGMA_TOL: f64 = 1e-5;
const SIGMA_STEPS: usize = 64;
const MIN_K_DIST_SCALE: f64 = 1e-3;
const GRAD_CLIP: f64 = 4.0;

/// Exact Euclidean k nearest neighbors (self excluded), sorted by
/// `(distance, index)`.
pub fn knn_graph(x: &Points, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (j, x.dist(i, j))).collect();
            row.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            row.truncate(k);
            row
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothKnn {
    pub rho: f64,
    pub sigma: f64,
    pub converged: bool,
}

/// Local connectivity for one point: `rho` is the nearest positive neighbor
/// distance and `sigma` is bisected until
/// `Σ_j exp(-max(0, d_j - rho) / sigma) = log2(k)` within 1e-5.
pub fn smooth_knn_calibration(distances: &[f64]) -> SmoothKnn {
    let k = distances.len();
    let target = (k as f64).log2();
    let rho = distances.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);

    let mass = |sigma: f64| -> f64 {
        distances
            .iter()
            .map(|&d| {
                let gap = d - rho;
                if gap > 0.0 {
                    (-gap / sigma).exp()
                } else {
                    1.0
                }
            })
            .sum()
    };

    let (mut lo, mut hi, mut sigma) = (0.0, f64::INFINITY, 1.0);
    let mut converged = false;
    for _ in 0..SIGMA_STEPS {
        let psum = mass(sigma);
        if (psum - target).abs() < SIGMA_TOL {
            converged = true;
            break;
        }
        if psum > target {
            hi = sigma;
            sigma = 0.5 * (lo + hi);
        } else {
            lo = sigma;
            sigma = if hi.is_finite() { 0.5 * (lo + hi) } else { sigma * 2.0 };
        }
    }
    let mean = if k > 0 { distances.iter().sum::<f64>() / k as f64 } else { 0.0 };
    let floor = MIN_K_DIST_SCALE * mean;
    if sigma < floor {
        sigma = floor;
    }
    SmoothKnn { rho, sigma: sigma.max(f64::MIN_POSITIVE), converged }
}

/// Symmetric fuzzy graph `a + b - ab` over directed kNN memberships, as
/// `(i, j, weight)` triples with both orientations, sorted by `(i, j)`.
pub fn fuzzy_simplicial_set(x: &Points, k: usize) -> Vec<(usize, usize, f64)> {
    let knn = knn_graph(x, k);
    let mut pairs: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for (i, row) in knn.iter().enumerate() {
        let dists: Vec<f64> = row.iter().map(|&(_, d)| d).collect();
        let cal = smooth_knn_calibration(&dists);
        for &(j, d) in row {
            let gap = d - cal.rho;
            let w = if gap > 0.0 { (-gap / cal.sigma).exp() } else { 1.0 };
            let entry = pairs.entry((i.min(j), i.max(j))).or_insert((0.0, 0.0));
            if i < j {
                entry.0 = w;
            } else {
                entry.1 = w;
            }
        }
    }
    let mut out = Vec::with_capacity(pairs.len() * 2);
    for (&(i, j), &(a, b)) in &pairs {
        let w = a + b - a * b;
        if w > 0.0 {
            out.push((i, j, w));
            out.push((j, i, w));
        }
    }
    out.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    out
}

/// Fits `1 / (1 + a x^{2b})` to the offset-exponential reference curve by
/// Levenberg–Marquardt least squares.
pub fn fit_ab(min_dist: f64, spread: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> =
        xs.iter().map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() }).collect();

    let sse = |a: f64, b: f64| -> f64 {
        xs.iter().zip(&ys).map(|(&x, &y)| (1.0 / (1.0 + a * x.powf(2.0 * b)) - y).powi(2)).sum()
    };

    let (mut a, mut b) = (1.0, 1.0);
    let mut lambda = 1e-3;
    let mut cost = sse(a, b);
    for _ in 0..500 {
        // normal equations J^T J and J^T r
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x <= 0.0 {
                continue;
            }
            let u = x.powf(2.0 * b);
            let den = 1.0 + a * u;
            let f = 1.0 / den;
            let r = f - y;
            let da = -u / (den * den);
            let db = -a * u * 2.0 * x.ln() / (den * den);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let mut improved = false;
        for _ in 0..30 {
            let (m11, m22) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
            let det = m11 * m22 - jab * jab;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(m22 * ga - jab * gb) / det;
            let step_b = -(m11 * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            let new_cost = if na > 0.0 && nb > 0.0 { sse(na, nb) } else { f64::INFINITY };
            if new_cost < cost {
                let rel = (cost - new_cost) / cost.max(1e-300);
                a = na;
                b = nb;
                cost = new_cost;
                lambda = (lambda * 0.1).max(1e-12);
                improved = rel > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UmapOutput {
    pub projection: Projection,
    pub a: f64,
    pub b: f64,
    pub effective_n_neighbors: usize,
}

fn initial_layout(x: &Points, rng: &mut impl Rng) -> Result<Points, DimRedError> {
    let n = x.len();
    let comps = x.dim().min(2).min(n);
    let (scores, _, _) = pca_points(x, comps)?;
    let mut init = Points::zeros(n, 2);
    for i in 0..n {
        for c in 0..comps {
            init.row_mut(i)[c] = scores.row(i)[c];
        }
    }
    let bounds = init.bounds();
    for c in 0..2 {
        let (lo, hi) = bounds[c];
        let span = hi - lo;
        for i in 0..n {
            let v = &mut init.row_mut(i)[c];
            *v = if c < comps && span > 0.0 {
                INIT_EXTENT * (2.0 * (*v - lo) / span - 1.0)
            } else {
                rng.random_range(-INIT_EXTENT..INIT_EXTENT)
            };
        }
    }
    Ok(init)
}

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-GRAD_CLIP, GRAD_CLIP)
}

/// UMAP to two dimensions.
///
/// Exact kNN graph, fuzzy union of local memberships, PCA initialization
/// scaled to `[-10, 10]`, then epoch-scheduled SGD on the fuzzy cross-entropy
/// with five negative samples per positive sample. Negative samples come from
/// one seeded stream consumed in a fixed order, so runs are reproducible.
pub fn umap(x: &EmbeddingMatrix, params: &UmapParams) -> Result<UmapOutput, DimRedError> {
    let n = x.len();
    if params.n_neighbors < 2 {
        return Err(DimRedError::InvalidParams("n_neighbors must be >= 2".into()));
    }
    if params.n_epochs == 0 {
        return Err(DimRedError::InvalidParams("n_epochs must be >= 1".into()));
    }
    if !(params.min_dist >= 0.0) {
        return Err(DimRedError::InvalidParams("min_dist must be non-negative".into()));
    }
    if n < 3 {
        return Err(DimRedError::TooFewPoints { needed: 3, got: n });
    }
    let k = if params.n_neighbors > n - 1 {
        log::warn!("UMAP n_neighbors {} clamped to {} for n = {n}", params.n_neighbors, n - 1);
        n - 1
    } else {
        params.n_neighbors
    };

    let (a, b) = fit_ab(params.min_dist, SPREAD);
    let mut graph = fuzzy_simplicial_set(x.points(), k);
    let w_max = graph.iter().map(|e| e.2).fold(0.0, f64::max);
    let n_epochs = params.n_epochs as f64;
    graph.retain(|e| e.2 >= w_max / n_epochs);

    let mut rng = seeded_rng(params.seed, streams::UMAP);
    let mut y = initial_layout(x.points(), &mut rng)?;

    let epochs_per_sample: Vec<f64> = graph.iter().map(|e| w_max / e.2).collect();
    let epochs_per_negative: Vec<f64> = epochs_per_sample.iter().map(|e| e / NEGATIVE_SAMPLE_RATE).collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = epochs_per_negative.clone();

    for epoch in 0..params.n_epochs {
        let alpha = INITIAL_ALPHA * (1.0 - epoch as f64 / n_epochs);
        let e = epoch as f64;
        for (edge, &(i, j, _)) in graph.iter().enumerate() {
            if next_sample[edge] > e {
                continue;
            }
            let (yi, yj) = (y.row(i).to_vec(), y.row(j).to_vec());
            let d2 = (yi[0] - yj[0]).powi(2) + (yi[1] - yj[1]).powi(2);
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for c in 0..2 {
                let g = clip(coeff * (yi[c] - yj[c])) * alpha;
                y.row_mut(i)[c] += g;
                y.row_mut(j)[c] -= g;
            }
            next_sample[edge] += epochs_per_sample[edge];

            let n_neg = ((e - next_negative[edge]) / epochs_per_negative[edge]).floor().max(0.0) as usize;
            for _ in 0..n_neg {
                let other = rng.random_range(0..n);
                if other == i {
                    continue;
                }
                let (yi, yk) = (y.row(i).to_vec(), y.row(other));
                let d2 = (yi[0] - yk[0]).powi(2) + (yi[1] - yk[1]).powi(2);
                let coeff = if d2 > 0.0 { 2.0 * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0)) } else { 0.0 };
                let deltas = [yi[0] - yk[0], yi[1] - yk[1]];
                let row = y.row_mut(i);
                for c in 0..2 {
                    let g = if coeff > 0.0 { clip(coeff * deltas[c]) } else { GRAD_CLIP };
                    row[c] += g * alpha;
                }
            }
            next_negative[edge] += n_neg as f64 * epochs_per_negative[edge];
        }
    }
    if !y.is_finite() {
        return Err(DimRedError::DegenerateInput("UMAP produced non-finite coordinates".into()));
    }
    let echo = UmapParams { n_neighbors: k, ..params.clone() };
    Ok(UmapOutput {
        projection: Projection::new(y, DrParams::Umap(echo), x.node_order().to_vec()),
        a,
        b,
        effective_n_neighbors: k,
    })
}
