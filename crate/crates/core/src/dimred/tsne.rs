use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DimRedError, DrParams, Projection};
use crate::embed::EmbeddingMatrix;
use crate::points::{seeded_rng, streams, Points};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneParams {
    /// Clamped to `(n-1)/3` on small inputs.
    pub perplexity: f64,
    pub learning_rate: f64,
    pub n_iter: usize,
    pub early_exaggeration: f64,
    /// Iterations run with exaggerated affinities and the initial momentum.
    pub exaggeration_iters: usize,
    pub momentum: f64,
    pub final_momentum: f64,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            learning_rate: 200.0,
            n_iter: 1000,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            momentum: 0.5,
            final_momentum: 0.8,
            seed: 0,
        }
    }
}

impl TsneParams {
    fn validate(&self) -> Result<(), DimRedError> {
        let bad = |m: &str| Err(DimRedError::InvalidParams(m.into()));
        if !(self.perplexity > 0.0) {
            return bad("perplexity must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.early_exaggeration > 0.0) {
            return bad("early_exaggeration must be positive");
        }
        if self.n_iter < 250 {
            return bad("n_iter must be >= 250");
        }
        Ok(())
    }
}

/// Result of the per-point precision search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub beta: f64,
    /// `2^H` at `beta`.
    pub perplexity: f64,
    /// False when the step budget ran out; `beta` is then the best seen.
    pub converged: bool,
}

const PERPLEXITY_TOL: f64 = 1e-5;
const MAX_BISECTIONS: usize = 50;
const MAX_EXPANSIONS: usize = 200;

/// `p_j ∝ exp(-beta * d²_j)` and its Shannon entropy in bits.
pub fn conditional_probabilities(sq_distances: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let min = sq_distances.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p: Vec<f64> = sq_distances.iter().map(|&d| (-beta * (d - min)).exp()).collect();
    let z: f64 = p.iter().sum();
    let mut entropy = 0.0;
    for v in &mut p {
        *v /= z;
        if *v > 0.0 {
            entropy -= *v * v.log2();
        }
    }
    (p, entropy)
}

/// Finds the precision `beta` whose conditional distribution over the given
/// squared distances has perplexity `target` (relative tolerance 1e-5).
///
/// The bracket is grown by doubling/halving from `beta = 1`, then bisected
/// for at most 50 steps.
pub fn perplexity_calibration(sq_distances: &[f64], target: f64) -> Result<Calibration, DimRedError> {
    if sq_distances.iter().filter(|d| d.is_finite()).count() < 2 || sq_distances.iter().any(|d| !d.is_finite()) {
        return Err(DimRedError::DegenerateInput("calibration row needs >= 2 finite distances".into()));
    }
    if !(target > 0.0) {
        return Err(DimRedError::InvalidParams("target perplexity must be positive".into()));
    }
    let mut beta = 1.0;
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    let mut best = Calibration { beta, perplexity: f64::NAN, converged: false };
    let mut best_err = f64::INFINITY;
    let mut bisections = 0;
    let mut expansions = 0;
    loop {
        let (_, h) = conditional_probabilities(sq_distances, beta);
        let perplexity = h.exp2();
        let err = (perplexity - target).abs();
        if err < best_err {
            best_err = err;
            best = Calibration { beta, perplexity, converged: false };
        }
        if err <= PERPLEXITY_TOL * target {
            return Ok(Calibration { beta, perplexity, converged: true });
        }
        let bracketed = lo > 0.0 && hi.is_finite();
        if bracketed {
            bisections += 1;
        } else {
            expansions += 1;
        }
        if bisections > MAX_BISECTIONS || expansions > MAX_EXPANSIONS {
            return Ok(best);
        }
        if perplexity > target {
            // too flat: sharpen
            lo = beta;
            beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = if lo > 0.0 { 0.5 * (beta + lo) } else { beta * 0.5 };
        }
    }
}

/// Symmetrized joint affinities `(p(j|i) + p(i|j)) / 2n`, row-major `n × n`.
/// Returns the matrix and the number of rows whose calibration did not converge.
pub fn joint_probabilities(x: &Points, perplexity: f64) -> Result<(Vec<f64>, usize), DimRedError> {
    let n = x.len();
    let mut cond = vec![0.0; n * n];
    let mut failures = 0;
    let mut row = Vec::with_capacity(n - 1);
    for i in 0..n {
        row.clear();
        row.extend((0..n).filter(|&j| j != i).map(|j| x.sq_dist(i, j)));
        let cal = perplexity_calibration(&row, perplexity)?;
        if !cal.converged {
            failures += 1;
        }
        let (p, _) = conditional_probabilities(&row, cal.beta);
        for (slot, j) in (0..n).filter(|&j| j != i).enumerate() {
            cond[i * n + j] = p[slot];
        }
    }
    let mut joint = vec![0.0; n * n];
    let norm = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            joint[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / norm;
        }
    }
    Ok((joint, failures))
}

/// `KL(P‖Q) = Σ p ln(p/q)` over entries with `p > 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi.max(f64::MIN_POSITIVE)).ln())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneOutput {
    pub projection: Projection,
    /// `(iteration, KL(P‖Q))`; iteration 0 is the initial layout.
    pub kl_trace: Vec<(usize, f64)>,
    pub effective_perplexity: f64,
    pub calibration_failures: usize,
}

const KL_EVERY: usize = 50;

/// Student-t affinities of a layout: returns `(unnormalized kernel, Z)`.
fn student_kernel(y: &Points) -> (Vec<f64>, f64) {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in (i + 1)..n {
            let w = 1.0 / (1.0 + y.sq_dist(i, j));
            num[i * n + j] = w;
            num[j * n + i] = w;
            row_sum += w;
        }
        z += 2.0 * row_sum;
    }
    (num, z)
}

fn layout_kl(p: &[f64], y: &Points) -> f64 {
    let (num, z) = student_kernel(y);
    let q: Vec<f64> = num.iter().map(|w| w / z).collect();
    kl_divergence(p, &q)
}

/// Exact t-SNE to two dimensions.
///
/// Gradient descent on `KL(P‖Q)` with momentum, per-coordinate adaptive gains
/// and early exaggeration; the layout is re-centered after every step.
/// Initialized from `N(0, 1e-4²)` draws. Summation order is fixed, so equal
/// inputs give bit-identical output.
pub fn tsne(x: &EmbeddingMatrix, params: &TsneParams) -> Result<TsneOutput, DimRedError> {
    params.validate()?;
    let n = x.len();
    if n < 5 {
        return Err(DimRedError::TooFewPoints { needed: 5, got: n });
    }
    let max_perplexity = (n as f64 - 1.0) / 3.0;
    let perplexity = if params.perplexity > max_perplexity {
        log::warn!("t-SNE perplexity {} clamped to {max_perplexity} for n = {n}", params.perplexity);
        max_perplexity
    } else {
        params.perplexity
    };
    let (p, calibration_failures) = joint_probabilities(x.points(), perplexity)?;
    if calibration_failures > 0 {
        log::warn!("t-SNE: {calibration_failures} rows did not reach target perplexity");
    }

    let dim = 2;
    let mut rng = seeded_rng(params.seed, streams::TSNE);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y = Points::new((0..n * dim).map(|_| normal.sample(&mut rng)).collect(), dim);
    let mut update = vec![0.0; n * dim];
    let mut gains = vec![1.0f64; n * dim];
    let mut grad = vec![0.0; n * dim];
    let mut kl_trace = vec![(0, layout_kl(&p, &y))];

    for iter in 0..params.n_iter {
        let early = iter < params.exaggeration_iters;
        let exaggeration = if early { params.early_exaggeration } else { 1.0 };
        let momentum = if early { params.momentum } else { params.final_momentum };

        let (num, z) = student_kernel(&y);
        for i in 0..n {
            let (mut gx, mut gy) = (0.0, 0.0);
            let yi = y.row(i);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let w = num[i * n + j];
                let coeff = (exaggeration * p[i * n + j] - w / z) * w;
                let yj = y.row(j);
                gx += coeff * (yi[0] - yj[0]);
                gy += coeff * (yi[1] - yj[1]);
            }
            grad[i * dim] = 4.0 * gx;
            grad[i * dim + 1] = 4.0 * gy;
        }

        for ((g, u), gain) in grad.iter().zip(update.iter_mut()).zip(gains.iter_mut()) {
            *gain = if (*g > 0.0) != (*u > 0.0) { *gain + 0.2 } else { *gain * 0.8 };
            *gain = gain.max(0.01);
            *u = momentum * *u - params.learning_rate * *gain * g;
        }
        let mut mean = [0.0; 2];
        for i in 0..n {
            let row = y.row_mut(i);
            for a in 0..dim {
                row[a] += update[i * dim + a];
                mean[a] += row[a];
            }
        }
        for i in 0..n {
            let row = y.row_mut(i);
            for a in 0..dim {
                row[a] -= mean[a] / n as f64;
            }
        }

        let done = iter + 1;
        if done % KL_EVERY == 0 || done == params.n_iter {
            kl_trace.push((done, layout_kl(&p, &y)));
        }
    }
    if !y.is_finite() {
        return Err(DimRedError::DegenerateInput("t-SNE diverged to non-finite coordinates".into()));
    }

    let echo = TsneParams { perplexity, ..params.clone() };
    Ok(TsneOutput {
        projection: Projection::new(y, DrParams::Tsne(echo), x.node_order().to_vec()),
        kl_trace,
        effective_perplexity: perplexity,
        calibration_failures,
    })
}
