//! Dense row-major point sets shared by layout, projection and clustering.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `n` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    /// Panics if `data.len()` is not a multiple of `dim`.
    pub fn new(data: Vec<f64>, dim: usize) -> Self {
        assert!(dim > 0 || data.is_empty(), "zero dimension with data");
        if dim > 0 {
            assert_eq!(data.len() % dim, 0, "data length {} not divisible by dim {dim}", data.len());
        }
        Self { data, dim }
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self::new(vec![0.0; n * dim], dim)
    }

    /// Builds from rows; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.as_ref().len(), dim, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { data, dim }
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.row(i), self.row(j))
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.sq_dist(i, j).sqrt()
    }

    /// Full `n × n` Euclidean distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                out[i * n + j] = d;
                out[j * n + i] = d;
            }
        }
        out
    }

    /// Per-axis `(min, max)`; empty for an empty set.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for r in self.rows() {
            for (axis, &v) in b.iter_mut().zip(r) {
                axis.0 = axis.0.min(v);
                axis.1 = axis.1.max(v);
            }
        }
        b
    }
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Seeded generator for one algorithm. `stream` separates consumers that share
/// a run seed so they never draw the same sequence.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) mod streams {
    pub const LAYOUT: u64 = 1;
    pub const TSNE: u64 = 2;
    pub const UMAP: u64 = 3;
    pub const MINIBATCH: u64 = 5;
    pub const SPECTRAL: u64 = 6;
    pub const LDA: u64 = 7;
    pub const SYNTH: u64 = 8;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_bounds() {
        let p = Points::from_rows(&[[0.0, 5.0], [2.0, -1.0], [1.0, 1.0]]);
        assert_eq!(p.len(), 3);
        assert_eq!(p.row(1), &[2.0, -1.0]);
        assert_eq!(p.bounds(), vec![(0.0, 2.0), (-1.0, 5.0)]);
        assert_eq!(p.sq_dist(0, 1), 4.0 + 36.0);
        let d = p.distance_matrix();
        assert_eq!(d[1], d[3]);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn empty_points() {
        let p = Points::from_rows::<[f64; 2]>(&[]);
        assert_eq!(p.len(), 0);
        assert!(p.bounds().is_empty());
    }
}
