//! Self-contained acceptance checks. Each returns `Ok(detail)` on pass and
//! `Err(detail)` on failure.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdart::Raster;
use qdart::drawgen::{FlowField, GENE_COUNT, Genome, map_genome, render};
use qdart::embedding::{TsneParams, fit_pca_components, fit_tsne, orthonormality_error};
use qdart::metrics::{deflate_len, low_pass, structural_complexity, tri_threshold};
use qdart::qd::{kmeans, mutate, mutated_alleles, nearest};

use super::*;

pub type Check = Result<String, String>;

pub fn mutation_statistics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let r = 1.0 / GENE_COUNT as f64;
    let trials = 10_000;
    let mut total = 0usize;
    for _ in 0..trials {
        let g = Genome::random(&mut rng);
        let m = mutate(&g, r, 0.25, &mut rng);
        if m.genes().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(format!("allele out of [0,1]: {:?}", m.genes()));
        }
        total += mutated_alleles(&g, &m);
    }
    let mean = total as f64 / trials as f64;
    let detail = format!("mean mutated alleles {mean:.4} over {trials} mutations (want [0.9, 1.1])");
    if (0.9..=1.1).contains(&mean) { Ok(detail) } else { Err(detail) }
}

pub fn flow_divergence(samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1F);
    let mut worst_ratio = 0.0f64;
    for i in 0..samples {
        let params = map_genome(&Genome::random(&mut rng));
        let field = FlowField::new(&params, rng.random());
        let pos = [rng.random_range(0.0..512.0), rng.random_range(0.0..512.0)];
        let t = rng.random_range(0.0..2000.0);
        let div = divergence(|p| field.velocity(p, t), pos, 0.1);
        let bound = 1e-3 * params.curl_strength;
        if div.abs() >= bound && !(div == 0.0 && bound == 0.0) {
            return Err(format!("sample {i}: |div| = {:.3e} >= {bound:.3e}", div.abs()));
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(div.abs() / params.curl_strength);
        }
    }
    Ok(format!("{samples} samples, max |div|/curl_strength = {worst_ratio:.2e} (< 1e-3)"))
}

/// Every labelling of the unit square's corners, many seeds, against
/// partition enumeration; then monotone objectives on random instances.
pub fn kmeans_oracle() -> Check {
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let best = brute_force_two_means(&corners);
    let mut instances = 0;
    let mut orders = vec![];
    permutations(&mut (0..4).collect::<Vec<usize>>(), 0, &mut orders);
    for order in &orders {
        let pts: Vec<[f64; 2]> = order.iter().map(|&i| corners[i]).collect();
        for seed in 0..25 {
            let km = kmeans(&pts, 2, seed).map_err(|e| e.to_string())?;
            instances += 1;
            if (km.objective - best).abs() > 1e-9 {
                return Err(format!(
                    "order {order:?} seed {seed}: objective {} vs optimum {best}",
                    km.objective
                ));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for inst in 0..100 {
        let n = rng.random_range(8..80);
        let k = rng.random_range(2..8.min(n));
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        let km = kmeans(&pts, k, inst).map_err(|e| e.to_string())?;
        if let Some(w) = km.objective_trace.windows(2).find(|w| w[1] > w[0] + 1e-12) {
            return Err(format!("instance {inst}: objective rose {} -> {}", w[0], w[1]));
        }
        for (p, &a) in pts.iter().zip(&km.assignments) {
            if a != nearest(p, &km.centroids) {
                return Err(format!("instance {inst}: point not at nearest centroid"));
            }
        }
    }
    Ok(format!(
        "{instances} corner instances at optimum {best} (within 1e-9); 100 random instances monotone"
    ))
}

fn permutations(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

pub fn pca_properties() -> Check {
    // Correlated full-rank data.
    let mut rng = ChaCha8Rng::seed_from_u64(0xACE);
    let dim = 64;
    let mix: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let rows: Vec<Vec<f64>> = (0..120)
        .map(|_| {
            let z: Vec<f64> = (0..dim).map(|j| rng.random_range(-1.0..1.0) * (1.0 + j as f64 / 8.0)).collect();
            (0..dim).map(|i| mix[i].iter().zip(&z).map(|(m, v)| m * v).sum()).collect()
        })
        .collect();
    let pca = fit_pca_components(&rows, 50).map_err(|e| e.to_string())?;
    let ortho = orthonormality_error(&pca.basis, pca.dim);
    if ortho >= 1e-6 {
        return Err(format!("orthonormality error {ortho:.3e}"));
    }
    if let Some(w) = pca.explained_variance.windows(2).find(|w| w[1] > w[0]) {
        return Err(format!("explained variance increases {} -> {}", w[0], w[1]));
    }
    let oracle = gram_covariance_eigenvalues(&rows);
    let mut worst_ev = 0.0f64;
    for (got, want) in pca.explained_variance.iter().zip(&oracle) {
        worst_ev = worst_ev.max((got - want).abs() / want.abs().max(1e-12));
    }
    if worst_ev > 1e-8 {
        return Err(format!("explained variance differs from Jacobi oracle by {worst_ev:.3e} (relative)"));
    }

    // Data on a 4-D affine subspace: 4 components reconstruct it exactly.
    let low = low_rank_rows(60, 30, 4, 0xB0B);
    let lp = fit_pca_components(&low, 4).map_err(|e| e.to_string())?;
    let mut worst_rec = 0.0f64;
    for r in &low {
        let back = lp.reconstruct(&lp.project(r));
        for (a, b) in back.iter().zip(r) {
            worst_rec = worst_rec.max((a - b).abs());
        }
    }
    if worst_rec >= 1e-6 {
        return Err(format!("rank-deficient reconstruction error {worst_rec:.3e}"));
    }
    let mean_proj = lp.project(&lp.mean);
    if mean_proj.iter().any(|v| v.abs() > 1e-9) {
        return Err("projection of the mean is not zero".to_string());
    }
    Ok(format!(
        "orthonormality {ortho:.1e}; oracle eigenvalue match {worst_ev:.1e}; rank-4 reconstruction {worst_rec:.1e}"
    ))
}

pub fn tsne_properties() -> Check {
    let (points, labels) = two_blobs(60, 10, 0x7);
    let params = TsneParams::default();
    let a = fit_tsne(&points, &params, 11).map_err(|e| e.to_string())?;
    let b = fit_tsne(&points, &params, 11).map_err(|e| e.to_string())?;
    let after: Vec<&(usize, f64)> = a.kl_trace.iter().filter(|(it, _)| *it >= params.exaggeration_iters).collect();
    if after.len() < 2 {
        return Err("KL trace too short".to_string());
    }
    for w in after.windows(2) {
        if w[1].1 > w[0].1 + 1e-3 {
            return Err(format!("KL rose from {:.5} (it {}) to {:.5} (it {})", w[0].1, w[0].0, w[1].1, w[1].0));
        }
    }
    let sil = silhouette(&a.layout, &labels);
    if sil <= 0.5 {
        return Err(format!("two-blob silhouette {sil:.3} <= 0.5"));
    }
    let bits = |r: &qdart::embedding::TsneResult| -> Vec<u64> {
        r.layout.iter().flat_map(|p| [p[0].to_bits(), p[1].to_bits()]).collect()
    };
    if bits(&a) != bits(&b) || a.kl_trace != b.kl_trace {
        return Err("two seeded runs differ".to_string());
    }
    Ok(format!(
        "KL {:.4} -> {:.4} after it {} (1e-3 slack); silhouette {sil:.3}; bit-identical rerun",
        after[0].1,
        after.last().unwrap().1,
        params.exaggeration_iters
    ))
}

pub fn complexity_ordering() -> Check {
    let blank = Raster::filled(256, 256, 255);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1015E);
    let noise = Raster::new(256, 256, (0..256 * 256).map(|_| rng.random()).collect()).map_err(|e| e.to_string())?;
    let (fb, fnoise) = (structural_complexity(&blank).value(), structural_complexity(&noise).value());
    if fb >= fnoise {
        return Err(format!("blank {fb:.5} >= noise {fnoise:.5}"));
    }
    let drawing = render(&Genome::uniform(0.5).map_err(|e| e.to_string())?, 256, 0).map_err(|e| e.to_string())?;
    for img in [&blank, &noise, &drawing] {
        let sigma = img.width() as f64 / 128.0;
        let sizes: Vec<usize> = (0..3)
            .map(|_| low_pass(img, sigma).map(|b| deflate_len(tri_threshold(&b).pixels())))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if sizes.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("compressed sizes differ across runs: {sizes:?}"));
        }
        if structural_complexity(img) != structural_complexity(img) {
            return Err("fitness differs across runs".to_string());
        }
    }
    Ok(format!("blank {fb:.5} < noise {fnoise:.5}; compressed sizes stable"))
}
