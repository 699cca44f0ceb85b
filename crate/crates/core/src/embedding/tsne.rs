//! Exact t-SNE.
//!
//! Gaussian input affinities calibrated per point to the target perplexity,
//! Student-t output kernel, gradient descent with momentum, per-parameter
//! gains and early exaggeration. Rows of the gradient are computed
//! independently and reduced in index order, so results are bit-identical
//! for any thread count.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::{Stream, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    /// `None` means `n / 12`.
    pub learning_rate: Option<f64>,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// KL divergence is recorded every this many iterations.
    pub kl_every: usize,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            exaggeration: 12.0,
            exaggeration_iters: 250,
            learning_rate: None,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            kl_every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneResult {
    pub layout: Vec<[f64; 2]>,
    /// `(iteration, KL(P || Q))` after that many completed iterations.
    pub kl_trace: Vec<(usize, f64)>,
}

const MIN_GAIN: f64 = 0.01;
const INIT_STD: f64 = 1e-4;

pub fn fit_tsne(points: &[Vec<f64>], params: &TsneParams, seed: u64) -> Result<TsneResult> {
    let n = points.len();
    if params.perplexity <= 0.0 {
        return Err(Error::validation("perplexity must be positive"));
    }
    if (n as f64) <= 3.0 * params.perplexity {
        return Err(Error::validation(format!(
            "t-SNE needs more than 3 * perplexity = {} points, got {n}",
            3.0 * params.perplexity
        )));
    }
    if params.iterations < params.exaggeration_iters.max(250) {
        return Err(Error::validation(format!(
            "t-SNE needs at least 250 iterations, got {}",
            params.iterations
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::validation("t-SNE input rows have differing lengths"));
    }
    if points.iter().all(|p| p == &points[0]) {
        return Err(Error::validation("t-SNE input points are all identical"));
    }

    let p = joint_affinities(points, params.perplexity);

    let mut rng = stream_rng(seed, Stream::Tsne, 0, 0);
    let normal = Normal::new(0.0, INIT_STD).expect("positive std");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let mut update = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let lr = params.learning_rate.unwrap_or(n as f64 / 12.0);

    let mut kl_trace = Vec::new();
    for iter in 0..params.iterations {
        let early = iter < params.exaggeration_iters;
        let exaggeration = if early { params.exaggeration } else { 1.0 };
        let momentum = if early {
            params.initial_momentum
        } else {
            params.final_momentum
        };

        let grad = gradient(&p, &y, exaggeration);
        for i in 0..n {
            for d in 0..2 {
                let g = grad[i][d];
                gains[i][d] = if (g > 0.0) != (update[i][d] > 0.0) {
                    gains[i][d] + 0.2
                } else {
                    (gains[i][d] * 0.8).max(MIN_GAIN)
                };
                update[i][d] = momentum * update[i][d] - lr * gains[i][d] * g;
                y[i][d] += update[i][d];
            }
        }
        centre(&mut y);

        let done = iter + 1;
        if params.kl_every > 0 && (done % params.kl_every == 0 || done == params.iterations) {
            kl_trace.push((done, kl_divergence(&p, &y)));
        }
    }
    Ok(TsneResult {
        layout: y,
        kl_trace,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Symmetrised `P`, dense `n x n`, zero diagonal, entries floored at 1e-12.
fn joint_affinities(points: &[Vec<f64>], perplexity: f64) -> Vec<f64> {
    let n = points.len();
    let target = perplexity.ln();
    let conditional: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d: Vec<f64> = (0..n).map(|j| sq_dist(&points[i], &points[j])).collect();
            calibrate_row(&d, i, target)
        })
        .collect();

    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = ((conditional[i][j] + conditional[j][i]) / denom).max(1e-12);
            }
        }
    }
    p
}

/// Binary search on the Gaussian precision so the row entropy equals `target` nats.
fn calibrate_row(dist: &[f64], i: usize, target: f64) -> Vec<f64> {
    let n = dist.len();
    let mut beta = 1.0;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut row = vec![0.0; n];
    // Shift by the nearest neighbour distance for numerical range.
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            row[j] = if j == i {
                0.0
            } else {
                (-(dist[j] - dmin) * beta).exp()
            };
            sum += row[j];
            weighted += (dist[j] - dmin) * row[j];
        }
        let entropy = sum.ln() + beta * weighted / sum;
        let diff = entropy - target;
        row.iter_mut().for_each(|v| *v /= sum);
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = if lo.is_finite() { (beta + lo) / 2.0 } else { beta / 2.0 };
        }
    }
    row
}

fn student_row(y: &[[f64; 2]], i: usize) -> impl Iterator<Item = f64> + '_ {
    let yi = y[i];
    y.iter().enumerate().map(move |(j, yj)| {
        if j == i {
            0.0
        } else {
            let (dx, dy) = (yi[0] - yj[0], yi[1] - yj[1]);
            1.0 / (1.0 + dx * dx + dy * dy)
        }
    })
}

fn normaliser(y: &[[f64; 2]]) -> f64 {
    let rows: Vec<f64> = (0..y.len())
        .into_par_iter()
        .map(|i| student_row(y, i).sum())
        .collect();
    rows.iter().sum()
}

fn gradient(p: &[f64], y: &[[f64; 2]], exaggeration: f64) -> Vec<[f64; 2]> {
    let n = y.len();
    let z = normaliser(y);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let prow = &p[i * n..(i + 1) * n];
            let mut g = [0.0; 2];
            for (j, w) in student_row(y, i).enumerate() {
                if j == i {
                    continue;
                }
                let coeff = (exaggeration * prow[j] - w / z) * w;
                g[0] += coeff * (y[i][0] - y[j][0]);
                g[1] += coeff * (y[i][1] - y[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        })
        .collect()
}

/// `KL(P || Q)` for the current layout.
fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let z = normaliser(y);
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let prow = &p[i * n..(i + 1) * n];
            student_row(y, i)
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, w)| prow[j] * (prow[j] / (w / z).max(1e-300)).ln())
                .sum()
        })
        .collect();
    rows.iter().sum()
}

fn centre(y: &mut [[f64; 2]]) {
    let n = y.len() as f64;
    let (mx, my) = y
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    for p in y.iter_mut() {
        p[0] -= mx / n;
        p[1] -= my / n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibrated_rows_hit_target_perplexity() {
        let pts: Vec<Vec<f64>> = (0..120).map(|i| vec![(i as f64).sin() * 3.0, i as f64 * 0.1]).collect();
        let d: Vec<f64> = (0..120).map(|j| sq_dist(&pts[5], &pts[j])).collect();
        let row = calibrate_row(&d, 5, 30f64.ln());
        let h: f64 = row.iter().filter(|&&v| v > 0.0).map(|v| -v * v.ln()).sum();
        assert!((h.exp() - 30.0).abs() < 0.01, "perplexity {}", h.exp());
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let same = vec![vec![1.0, 2.0]; 100];
        assert!(fit_tsne(&same, &TsneParams::default(), 0).is_err());
        let few: Vec<Vec<f64>> = (0..90).map(|i| vec![i as f64]).collect();
        assert!(fit_tsne(&few, &TsneParams::default(), 0).is_err());
        let ok: Vec<Vec<f64>> = (0..91).map(|i| vec![i as f64]).collect();
        let short = TsneParams {
            iterations: 249,
            ..TsneParams::default()
        };
        assert!(fit_tsne(&ok, &short, 0).is_err());
    }
}
