//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

pub mod criteria;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Eigenvalues (descending) and vectors of a symmetric matrix by cyclic
/// Jacobi rotations.
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
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
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    let values = idx.iter().map(|&i| a[i][i]).collect();
    let vectors = idx.iter().map(|&i| v.iter().map(|row| row[i]).collect()).collect();
    (values, vectors)
}

/// Nonzero covariance eigenvalues through the n x n Gram matrix of the
/// centred rows (divisor n - 1), descending.
pub fn gram_covariance_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let dim = rows[0].len();
    let mean: Vec<f64> = (0..dim).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let c: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect()).collect();
    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| c[i].iter().zip(&c[j]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 - 1.0))
                .collect()
        })
        .collect();
    jacobi_eigen(gram).0
}

fn sse(points: &[[f64; 2]]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let n = points.len() as f64;
    let c = [
        points.iter().map(|p| p[0]).sum::<f64>() / n,
        points.iter().map(|p| p[1]).sum::<f64>() / n,
    ];
    points.iter().map(|p| (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sum()
}

/// Optimal 2-means objective by enumerating every 2-partition.
pub fn brute_force_two_means(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let (a, b): (Vec<_>, Vec<_>) = (0..n).partition(|&i| mask & (1 << i) != 0);
        let pa: Vec<[f64; 2]> = a.iter().map(|&i| points[i]).collect();
        let pb: Vec<[f64; 2]> = b.iter().map(|&i| points[i]).collect();
        best = best.min(sse(&pa) + sse(&pb));
    }
    best
}

/// Mean silhouette coefficient of a labelled 2-D layout.
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    let dist = |a: &[f64; 2], b: &[f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let clusters = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mut sum = vec![0.0; clusters];
        let mut count = vec![0usize; clusters];
        for (j, q) in points.iter().enumerate() {
            if i != j {
                sum[labels[j]] += dist(p, q);
                count[labels[j]] += 1;
            }
        }
        let own = labels[i];
        let a = if count[own] > 0 { sum[own] / count[own] as f64 } else { 0.0 };
        let b = (0..clusters)
            .filter(|&c| c != own && count[c] > 0)
            .map(|c| sum[c] / count[c] as f64)
            .fold(f64::INFINITY, f64::min);
        total += if count[own] == 0 { 0.0 } else { (b - a) / a.max(b) };
    }
    total / points.len() as f64
}

/// Two well-separated Gaussian blobs in `dim` dimensions, `per` points each.
pub fn two_blobs(per: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (label, centre) in [(0usize, -5.0), (1, 5.0)] {
        for _ in 0..per {
            points.push(
                (0..dim)
                    .map(|_| { let z: f64 = StandardNormal.sample(&mut rng); centre + z })
                    .collect::<Vec<f64>>(),
            );
            labels.push(label);
        }
    }
    (points, labels)
}

/// Central-difference divergence of `v` at `pos`.
pub fn divergence(v: impl Fn([f64; 2]) -> [f64; 2], pos: [f64; 2], h: f64) -> f64 {
    let dvx = (v([pos[0] + h, pos[1]])[0] - v([pos[0] - h, pos[1]])[0]) / (2.0 * h);
    let dvy = (v([pos[0], pos[1] + h])[1] - v([pos[0], pos[1] - h])[1]) / (2.0 * h);
    dvx + dvy
}

/// Mean Euclidean distance over all unordered pairs.
pub fn mean_pairwise_distance(vs: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            sum += vs[i].iter().zip(&vs[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// Rows on a `rank`-dimensional affine subspace of `dim`-space.
pub fn low_rank_rows(n: usize, dim: usize, rank: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vec<f64>> = (0..rank).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let offset: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    (0..n)
        .map(|_| {
            let coef: Vec<f64> = (0..rank).map(|_| rng.random_range(-3.0..3.0)).collect();
            (0..dim)
                .map(|j| offset[j] + coef.iter().zip(&dirs).map(|(c, d)| c * d[j]).sum::<f64>())
                .collect()
        })
        .collect()
}
