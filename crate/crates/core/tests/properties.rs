mod common;

use common::criteria;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qdart::drawgen::Genome;
use qdart::embedding::{CorpusEmbedding, TsneParams};
use qdart::qd::{Candidate, EliteArchive, kmeans, nearest, objective};

fn pass(c: criteria::Check) {
    if let Err(e) = c {
        panic!("{e}");
    }
}

#[test]
fn mutation_statistics() {
    pass(criteria::mutation_statistics());
}

#[test]
fn flow_field_is_divergence_free() {
    pass(criteria::flow_divergence(1000));
}

#[test]
fn kmeans_matches_partition_enumeration() {
    pass(criteria::kmeans_oracle());
}

#[test]
fn pca_matches_jacobi_oracle() {
    pass(criteria::pca_properties());
}

#[test]
fn tsne_properties() {
    pass(criteria::tsne_properties());
}

#[test]
fn complexity_orders_blank_below_noise() {
    pass(criteria::complexity_ordering());
}

#[test]
fn jacobi_oracle_diagonalises() {
    let a = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 1.0]];
    let (vals, vecs) = common::jacobi_eigen(a.clone());
    for (l, v) in vals.iter().zip(&vecs) {
        for i in 0..3 {
            let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
            assert!((av - l * v[i]).abs() < 1e-12);
        }
    }
    let trace: f64 = vals.iter().sum();
    assert!((trace - 8.0).abs() < 1e-12);
}

#[test]
fn brute_force_oracle_on_known_layout() {
    // Two tight pairs far apart.
    let pts = [[0.0, 0.0], [0.0, 0.1], [5.0, 0.0], [5.0, 0.1]];
    assert!((common::brute_force_two_means(&pts) - 0.01).abs() < 1e-12);
}

fn small_corpus(seed: u64) -> CorpusEmbedding {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latents: Vec<Vec<f32>> = (0..40)
        .map(|_| (0..512).map(|_| rand::Rng::random_range(&mut rng, -1.0f32..1.0)).collect())
        .collect();
    let params = TsneParams {
        perplexity: 5.0,
        iterations: 250,
        ..TsneParams::default()
    };
    CorpusEmbedding::fit(&latents, 8, &params, seed).unwrap().embedding
}

#[test]
fn embed_new_stays_in_unit_square() {
    let corpus = small_corpus(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for scale in [0.1f32, 1.0, 100.0] {
        for _ in 0..20 {
            let q: Vec<f32> = (0..512).map(|_| scale * rand::Rng::random_range(&mut rng, -1.0f32..1.0)).collect();
            let p = corpus.embed_new(&q, 5).unwrap();
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)), "{p:?}");
        }
    }
}

#[test]
fn corpus_embedding_is_deterministic() {
    let a = small_corpus(9).to_tensors().to_bytes();
    let b = small_corpus(9).to_tensors().to_bytes();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn challenge_never_lowers_fitness(
        centroids in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 2..8),
        moves in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.001f64..1.0), 1..40),
        alpha in 0.0f64..=1.0,
    ) {
        let cs: Vec<[f64; 2]> = centroids.iter().map(|&(x, y)| [x, y]).collect();
        let mut archive = EliteArchive::new(&cs).unwrap();
        let g = Genome::uniform(0.5).unwrap();
        for (x, y, fit) in moves {
            let before = archive.niche_fitness();
            let populated = archive.populated();
            archive.challenge(Candidate { genome: g, fitness: fit, map_pos: [x, y] }, Some(alpha));
            let after = archive.niche_fitness();
            for (b, a) in before.iter().zip(&after) {
                if let Some(b) = b {
                    prop_assert!(a.unwrap() >= *b);
                }
            }
            prop_assert!(archive.populated() >= populated);
            for c in archive.centroids() {
                prop_assert!((0.0..=1.0).contains(&c[0]) && (0.0..=1.0).contains(&c[1]));
            }
            prop_assert!((0.0..=1.0).contains(&archive.diversity()));
        }
    }

    #[test]
    fn kmeans_assigns_to_nearest(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..60),
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let pts: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        prop_assume!(pts.len() >= k);
        let km = kmeans(&pts, k, seed).unwrap();
        for (p, &a) in pts.iter().zip(&km.assignments) {
            // Linear scan with lowest-index ties.
            let mut best = 0;
            for j in 1..k {
                let dj = (p[0] - km.centroids[j][0]).powi(2) + (p[1] - km.centroids[j][1]).powi(2);
                let db = (p[0] - km.centroids[best][0]).powi(2) + (p[1] - km.centroids[best][1]).powi(2);
                if dj < db {
                    best = j;
                }
            }
            prop_assert_eq!(a, best);
            prop_assert_eq!(a, nearest(p, &km.centroids));
        }
        let obj = objective(&pts, &km.centroids, &km.assignments);
        prop_assert!((obj - km.objective).abs() < 1e-12);
    }
}
