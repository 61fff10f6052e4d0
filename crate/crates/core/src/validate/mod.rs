//! Cluster validity metrics and the clustering × projection report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::points::Points;

mod report;

pub use report::{MetricsReport, ReportError, ReportScope};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("metric undefined: fewer than 2 clusters or 3 points after removing noise")]
    Undefined,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

fn check_len(a: usize, b: usize) -> Result<(), MetricError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricError::LengthMismatch(a, b))
    }
}

/// Non-noise points grouped by label, ordered by label.
fn groups(labels: &[i32]) -> BTreeMap<i32, Vec<usize>> {
    let mut g: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            g.entry(l).or_default().push(i);
        }
    }
    g
}

/// Mean silhouette over non-noise points. Points in singleton clusters score 0.
pub fn silhouette(y: &Points, labels: &[i32]) -> Result<f64, MetricError> {
    check_len(y.len(), labels.len())?;
    let g = groups(labels);
    if g.len() < 2 {
        return Err(MetricError::Undefined);
    }
    let members: Vec<&Vec<usize>> = g.values().collect();
    let mut total = 0.0;
    let mut count = 0usize;
    for (ci, own) in members.iter().enumerate() {
        for &i in own.iter() {
            count += 1;
            if own.len() == 1 {
                continue;
            }
            let a = own.iter().filter(|&&j| j != i).map(|&j| y.dist(i, j)).sum::<f64>() / (own.len() - 1) as f64;
            let b = members
                .iter()
                .enumerate()
                .filter(|&(cj, _)| cj != ci)
                .map(|(_, other)| other.iter().map(|&j| y.dist(i, j)).sum::<f64>() / other.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / count as f64)
}

/// Davies-Bouldin index over non-noise points, with scatter measured as the
/// mean distance to the centroid. Coincident centroids give `+inf`.
pub fn davies_bouldin(y: &Points, labels: &[i32]) -> Result<f64, MetricError> {
    check_len(y.len(), labels.len())?;
    let g = groups(labels);
    if g.len() < 2 {
        return Err(MetricError::Undefined);
    }
    let dim = y.dim();
    let stats: Vec<(Vec<f64>, f64)> = g
        .values()
        .map(|idx| {
            let mut c = vec![0.0; dim];
            for &i in idx {
                for (a, v) in c.iter_mut().zip(y.row(i)) {
                    *a += v;
                }
            }
            c.iter_mut().for_each(|a| *a /= idx.len() as f64);
            let s = idx.iter().map(|&i| crate::points::sq_dist(y.row(i), &c).sqrt()).sum::<f64>() / idx.len() as f64;
            (c, s)
        })
        .collect();
    let k = stats.len();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in (0..k).filter(|&j| j != i) {
            let sep = crate::points::sq_dist(&stats[i].0, &stats[j].0).sqrt();
            let r = if sep > 0.0 { (stats[i].1 + stats[j].1) / sep } else { f64::INFINITY };
            worst = worst.max(r);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

fn choose2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Pair-counting adjusted Rand index. Every label, including negative ones,
/// is treated as an ordinary class.
pub fn adjusted_rand(a: &[i64], b: &[i64]) -> Result<f64, MetricError> {
    check_len(a.len(), b.len())?;
    let n = a.len();
    let mut table: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut rows: BTreeMap<i64, usize> = BTreeMap::new();
    let mut cols: BTreeMap<i64, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c as f64)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c as f64)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c as f64)).sum();
    let total = choose2(n as f64);
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Convenience wrapper for `i32` labels.
pub fn adjusted_rand_i32(a: &[i32], b: &[i32]) -> Result<f64, MetricError> {
    let a: Vec<i64> = a.iter().map(|&v| v as i64).collect();
    let b: Vec<i64> = b.iter().map(|&v| v as i64).collect();
    adjusted_rand(&a, &b)
}

/// One report cell. Both metrics are `None` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub silhouette: Option<f64>,
    #[serde(with = "float_or_inf")]
    pub davies_bouldin: Option<f64>,
    pub n_evaluated: usize,
    pub noise_fraction: f64,
    /// Why the cell is undefined or unusual (coincident centroids, errors).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

impl MetricValue {
    pub fn is_defined(&self) -> bool {
        self.silhouette.is_some() && self.davies_bouldin.is_some()
    }

    /// An undefined cell carrying an explanation.
    pub fn failed(message: impl Into<String>) -> Self {
        Self { silhouette: None, davies_bouldin: None, n_evaluated: 0, noise_fraction: 0.0, flag: Some(message.into()) }
    }
}

/// Evaluates both metrics on `y`. Undefined when fewer than two clusters or
/// fewer than three points remain after dropping noise.
pub fn evaluate(y: &Points, labels: &[i32]) -> Result<MetricValue, MetricError> {
    check_len(y.len(), labels.len())?;
    let n = labels.len();
    let n_evaluated = labels.iter().filter(|&&l| l >= 0).count();
    let noise_fraction = if n == 0 { 0.0 } else { (n - n_evaluated) as f64 / n as f64 };
    let n_clusters = groups(labels).len();
    if n_clusters < 2 || n_evaluated < 3 {
        return Ok(MetricValue {
            silhouette: None,
            davies_bouldin: None,
            n_evaluated,
            noise_fraction,
            flag: Some(format!("{n_clusters} clusters over {n_evaluated} non-noise points")),
        });
    }
    let s = silhouette(y, labels)?;
    let d = davies_bouldin(y, labels)?;
    Ok(MetricValue {
        silhouette: Some(s),
        davies_bouldin: Some(d),
        n_evaluated,
        noise_fraction,
        flag: d.is_infinite().then(|| "coincident centroids".to_string()),
    })
}

/// JSON has no infinity; write it as the string "inf".
mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => s.serialize_str("inf"),
            Some(x) => s.serialize_some(x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Num(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!("bad metric value {t:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_points() -> (Points, Vec<i32>) {
        (Points::from_rows(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]), vec![0, 0, 1, 1])
    }

    #[test]
    fn four_point_fixture() {
        let (y, l) = four_points();
        let s = silhouette(&y, &l).unwrap();
        let b = (10.0 + 101f64.sqrt()) / 2.0;
        assert!((s - (b - 1.0) / b).abs() < 1e-12);
        assert!((s - 0.9002).abs() < 1e-4);
        assert!((davies_bouldin(&y, &l).unwrap() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn singletons_score_zero() {
        let y = Points::from_rows(&[[0.0, 0.0], [5.0, 5.0]]);
        assert_eq!(silhouette(&y, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn undefined_cases() {
        let (y, _) = four_points();
        assert_eq!(silhouette(&y, &[0, 0, 0, 0]), Err(MetricError::Undefined));
        assert_eq!(davies_bouldin(&y, &[-1, -1, -1, -1]), Err(MetricError::Undefined));
        let v = evaluate(&y, &[0, 1, -1, -1]).unwrap();
        assert!(!v.is_defined());
        assert_eq!(v.n_evaluated, 2);
        assert_eq!(v.noise_fraction, 0.5);
        assert!(evaluate(&y, &[0, 1, 1, -1]).unwrap().is_defined());
    }

    #[test]
    fn noise_is_excluded() {
        let y = Points::from_rows(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0], [100.0, 100.0]]);
        let (four, l) = four_points();
        let with_noise = silhouette(&y, &[0, 0, 1, 1, -1]).unwrap();
        assert_eq!(with_noise, silhouette(&four, &l).unwrap());
    }

    #[test]
    fn coincident_centroids_flagged() {
        let y = Points::from_rows(&[[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]]);
        let v = evaluate(&y, &[0, 0, 1, 1]).unwrap();
        assert_eq!(v.davies_bouldin, Some(f64::INFINITY));
        assert!(v.flag.is_some());
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"davies_bouldin\":\"inf\""));
        assert_eq!(serde_json::from_str::<MetricValue>(&json).unwrap(), v);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(adjusted_rand(&[0, 0, 1, 1], &[5, 5, 2, 2]).unwrap(), 1.0);
        assert_eq!(adjusted_rand(&[0, 0, 0, 0], &[0, 1, 2, 3]).unwrap(), 0.0);
        // contingency {2,0 ; 1,1}: index 1, row/col pair sums 2 and 3, expected 1
        assert_eq!(adjusted_rand(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap(), 0.0);
        assert_eq!(adjusted_rand(&[0, 1], &[0]), Err(MetricError::LengthMismatch(2, 1)));
    }
}
