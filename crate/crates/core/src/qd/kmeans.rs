//! k-means: k-means++ seeding, Lloyd iterations and single-point (Hartigan) refinement.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed::{Stream, stream_rng};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans<const D: usize> {
    pub centroids: Vec<[f64; D]>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub objective: f64,
    /// Objective after seeding, then after each Lloyd iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

pub fn sq_dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the closest centroid; ties go to the lowest index.
pub fn nearest<const D: usize>(p: &[f64; D], centroids: &[[f64; D]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

pub fn objective<const D: usize>(points: &[[f64; D]], centroids: &[[f64; D]], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

fn seed_plus_plus<const D: usize>(points: &[[f64; D]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; D]> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            // Rounding can leave the walk on a zero-weight tail.
            if d2[idx] == 0.0 {
                idx = d2.iter().rposition(|&w| w > 0.0).expect("total > 0");
            }
            idx
        } else {
            chosen.iter().position(|&c| !c).expect("k <= n")
        };
        chosen[pick] = true;
        centroids.push(points[pick]);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[pick]));
        }
    }
    centroids
}

fn update_centroids<const D: usize>(points: &[[f64; D]], assignments: &[usize], centroids: &mut [[f64; D]]) {
    let k = centroids.len();
    let mut sums = vec![[0.0; D]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        for d in 0..D {
            sums[a][d] += p[d];
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            for d in 0..D {
                centroids[j][d] = sums[j][d] / counts[j] as f64;
            }
        }
    }
}

/// One pass of Hartigan moves in point order: a point moves to the cluster
/// whose size-weighted squared distance beats its removal gain. Returns
/// whether any point moved.
fn hartigan_pass<const D: usize>(points: &[[f64; D]], assignments: &mut [usize], centroids: &mut [[f64; D]]) -> bool {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    let mut moved = false;
    for (i, p) in points.iter().enumerate() {
        let a = assignments[i];
        if counts[a] <= 1 {
            continue;
        }
        let na = counts[a] as f64;
        let gain = na / (na - 1.0) * sq_dist(p, &centroids[a]);
        let mut best = None;
        let mut best_cost = gain * (1.0 - 1e-12);
        for j in (0..k).filter(|&j| j != a) {
            let nj = counts[j] as f64;
            let cost = nj / (nj + 1.0) * sq_dist(p, &centroids[j]);
            if cost < best_cost {
                best_cost = cost;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            assignments[i] = j;
            counts[a] -= 1;
            counts[j] += 1;
            update_centroids(points, assignments, centroids);
            moved = true;
        }
    }
    moved
}

/// Cluster `points` into `k` groups. Empty clusters keep their previous centroid.
pub fn kmeans<const D: usize>(points: &[[f64; D]], k: usize, seed: u64) -> Result<KMeans<D>> {
    if k == 0 {
        return Err(Error::validation("k-means needs k >= 1"));
    }
    if points.len() < k {
        return Err(Error::validation(format!(
            "k-means needs at least k = {k} points, got {}",
            points.len()
        )));
    }
    let mut rng = stream_rng(seed, Stream::KMeans, 0, 0);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    let mut objective_trace = vec![objective(points, &centroids, &assignments)];

    let mut iterations = 0;
    loop {
        // Lloyd to a fixpoint, then single-point moves; repeat until neither
        // changes anything so the result is a Lloyd fixpoint that no single
        // reassignment can improve.
        let mut converged = false;
        while iterations < MAX_LLOYD_ITERATIONS {
            iterations += 1;
            update_centroids(points, &assignments, &mut centroids);
            let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
            let changed = next != assignments;
            assignments = next;
            objective_trace.push(objective(points, &centroids, &assignments));
            if !changed {
                converged = true;
                break;
            }
        }
        if !converged || !hartigan_pass(points, &mut assignments, &mut centroids) {
            break;
        }
        objective_trace.push(objective(points, &centroids, &assignments));
    }
    Ok(KMeans {
        objective: *objective_trace.last().expect("non-empty"),
        centroids,
        assignments,
        objective_trace,
        iterations,
    })
}
