//! Independent reference implementations used to cross-check the library.
//! Written for clarity over speed: plain nested loops, no shared helpers.
#![allow(dead_code)]

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Silhouette by definition; noise (`< 0`) dropped, singletons score 0.
pub fn silhouette_ref(rows: &[Vec<f64>], labels: &[i32]) -> Option<f64> {
    let keep: Vec<usize> = (0..rows.len()).filter(|&i| labels[i] >= 0).collect();
    let mut ids: Vec<i32> = keep.iter().map(|&i| labels[i]).collect();
    ids.sort();
    ids.dedup();
    if ids.len() < 2 {
        return None;
    }
    let mut scores = Vec::new();
    for &i in &keep {
        let own = keep.iter().filter(|&&j| labels[j] == labels[i]).count();
        if own == 1 {
            scores.push(0.0);
            continue;
        }
        let mut a_sum = 0.0;
        for &j in &keep {
            if j != i && labels[j] == labels[i] {
                a_sum += euclid(&rows[i], &rows[j]);
            }
        }
        let a = a_sum / (own - 1) as f64;
        let mut b = f64::INFINITY;
        for &c in &ids {
            if c == labels[i] {
                continue;
            }
            let members: Vec<usize> = keep.iter().copied().filter(|&j| labels[j] == c).collect();
            let mean = members.iter().map(|&j| euclid(&rows[i], &rows[j])).sum::<f64>() / members.len() as f64;
            if mean < b {
                b = mean;
            }
        }
        let m = if a > b { a } else { b };
        scores.push(if m == 0.0 { 0.0 } else { (b - a) / m });
    }
    Some(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Davies-Bouldin by definition with mean-distance scatter; noise dropped.
pub fn davies_bouldin_ref(rows: &[Vec<f64>], labels: &[i32]) -> Option<f64> {
    let mut ids: Vec<i32> = labels.iter().copied().filter(|&l| l >= 0).collect();
    ids.sort();
    ids.dedup();
    if ids.len() < 2 {
        return None;
    }
    let dim = rows[0].len();
    let mut centroids = Vec::new();
    let mut scatters = Vec::new();
    for &c in &ids {
        let members: Vec<&Vec<f64>> = rows.iter().zip(labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
        let centroid: Vec<f64> =
            (0..dim).map(|d| members.iter().map(|r| r[d]).sum::<f64>() / members.len() as f64).collect();
        let scatter = members.iter().map(|r| euclid(r, &centroid)).sum::<f64>() / members.len() as f64;
        centroids.push(centroid);
        scatters.push(scatter);
    }
    let k = ids.len();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..k {
            if i != j {
                let r = (scatters[i] + scatters[j]) / euclid(&centroids[i], &centroids[j]);
                if r > worst {
                    worst = r;
                }
            }
        }
        total += worst;
    }
    Some(total / k as f64)
}

/// ARI from raw pair counts: every unordered pair is classified by whether
/// each partition puts it together.
pub fn ari_pairs(a: &[i64], b: &[i64]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (n00 * n11 - n01 * n10) / denom
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Returns
/// eigenvalues and column eigenvectors, unsorted.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// PCA through the Jacobi oracle: centered data projected on the top
/// `out_dim` eigenvectors of the sample covariance (divisor n − 1).
pub fn pca_ref(rows: &[Vec<f64>], out_dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            cov[i][j] = centered.iter().map(|r| r[i] * r[j]).sum::<f64>() / (n - 1) as f64;
        }
    }
    let (values, vectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
    let proj = centered
        .iter()
        .map(|r| {
            order
                .iter()
                .take(out_dim)
                .map(|&c| (0..d).map(|j| r[j] * vectors[j][c]).sum())
                .collect()
        })
        .collect();
    (proj, order.iter().take(out_dim).map(|&c| values[c].max(0.0)).collect())
}

/// Cuts the `k − 1` heaviest edges of a Kruskal MST; components are the
/// single-linkage clusters. Labels are component minima.
pub fn mst_cut_labels(rows: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = rows.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((euclid(&rows[i], &rows[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] == x {
            x
        } else {
            let r = root(p, p[x]);
            p[x] = r;
            r
        }
    }
    let mut merges = 0;
    for (_, i, j) in edges {
        if merges == n - k {
            break;
        }
        let (a, b) = (root(&mut parent, i), root(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
            merges += 1;
        }
    }
    (0..n).map(|i| root(&mut parent, i)).collect()
}
