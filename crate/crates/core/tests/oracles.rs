mod support;

use ppkg_core::cluster::{agglomerative_labels, canonicalize, Linkage};
use ppkg_core::dimred::pca_points;
use ppkg_core::points::{seeded_rng, Points};
use ppkg_core::validate::{adjusted_rand, davies_bouldin, silhouette};
use rand::Rng;
use support::oracles::*;

fn random_dataset(rng: &mut impl Rng, max_n: usize, dim: usize) -> Vec<Vec<f64>> {
    let n = rng.random_range(3..=max_n);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-50.0..50.0)).collect()).collect()
}

#[test]
fn metrics_match_brute_force() {
    let mut rng = seeded_rng(2024, 0);
    let mut checked = 0;
    for _ in 0..100 {
        let rows = random_dataset(&mut rng, 200, 2);
        let k = rng.random_range(2..=8);
        let labels: Vec<i32> = (0..rows.len()).map(|i| if i < k { i as i32 } else { rng.random_range(0..k as i32) }).collect();
        let y = Points::from_rows(&rows);
        let s = silhouette(&y, &labels).unwrap();
        let d = davies_bouldin(&y, &labels).unwrap();
        assert!((s - silhouette_ref(&rows, &labels).unwrap()).abs() < 1e-9);
        assert!((d - davies_bouldin_ref(&rows, &labels).unwrap()).abs() < 1e-9);
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn metrics_with_noise_match_brute_force() {
    let mut rng = seeded_rng(7, 0);
    for _ in 0..30 {
        let rows = random_dataset(&mut rng, 80, 2);
        let labels: Vec<i32> = (0..rows.len()).map(|i| if i < 2 { i as i32 } else { rng.random_range(-1..4) }).collect();
        let y = Points::from_rows(&rows);
        assert!((silhouette(&y, &labels).unwrap() - silhouette_ref(&rows, &labels).unwrap()).abs() < 1e-9);
        assert!((davies_bouldin(&y, &labels).unwrap() - davies_bouldin_ref(&rows, &labels).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn ari_matches_pair_counts() {
    let mut rng = seeded_rng(11, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..60);
        let ka = rng.random_range(1..6);
        let kb = rng.random_range(1..6);
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<i64> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let got = adjusted_rand(&a, &b).unwrap();
        assert!((got - ari_pairs(&a, &b)).abs() < 1e-9, "{a:?} {b:?}");
    }
}

fn assert_pca_matches(rows: &[Vec<f64>], out_dim: usize) {
    let (proj, var, _) = pca_points(&Points::from_rows(rows), out_dim).unwrap();
    let (ref_proj, ref_var) = pca_ref(rows, out_dim);
    for (a, b) in var.iter().zip(&ref_var) {
        assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "variance {a} vs {b}");
    }
    let scale = rows.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    for c in 0..out_dim {
        let dot: f64 = (0..rows.len()).map(|i| proj.row(i)[c] * ref_proj[i][c]).sum();
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows.len() {
            let diff = (proj.row(i)[c] - sign * ref_proj[i][c]).abs();
            assert!(diff < 1e-8 * scale, "component {c} row {i}: diff {diff}");
        }
    }
}

#[test]
fn pca_matches_jacobi_oracle() {
    let mut rng = seeded_rng(99, 0);
    for _ in 0..50 {
        let d = rng.random_range(2..=10);
        let rows = random_dataset(&mut rng, 200, d);
        // stretch axes so eigenvalues are well separated
        let rows: Vec<Vec<f64>> =
            rows.into_iter().map(|r| r.iter().enumerate().map(|(j, v)| v * (1.0 + j as f64)).collect()).collect();
        assert_pca_matches(&rows, 2.min(d));
    }
}

#[test]
fn single_linkage_equals_mst_cut() {
    let mut rng = seeded_rng(5, 0);
    for _ in 0..40 {
        let rows = random_dataset(&mut rng, 40, 2);
        let k = rng.random_range(1..=rows.len().min(6));
        let got = agglomerative_labels(&Points::from_rows(&rows), k, Linkage::Single).unwrap();
        let want = mst_cut_labels(&rows, k);
        let canon = |v: &[usize]| canonicalize(&v.iter().map(|&x| x as i64).collect::<Vec<_>>()).0;
        assert_eq!(canon(&got), canon(&want));
    }
}
