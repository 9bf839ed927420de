use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use semdecode::dataio::FeatureMatrix;
use semdecode::latent_index::{LatentIndex, Metric};
use semdecode::taxonomy::SynsetRef;

struct Instance {
    rows: Vec<Vec<f64>>,
    query: Vec<f64>,
    k: usize,
}

/// Gaussian rows, some of them exact duplicates so that the tie rule matters.
fn instance(m: usize, d: usize, seed: u64, integer: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d)
            .map(|_| {
                if integer {
                    f64::from(rng.random_range(-2i32..=2))
                } else {
                    StandardNormal.sample(rng)
                }
            })
            .collect()
    };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        if i > 0 && rng.random_bool(0.2) {
            let j = rng.random_range(0..i);
            rows.push(rows[j].clone());
        } else {
            let mut r = draw(&mut rng);
            if r.iter().all(|v| *v == 0.0) {
                r[0] = 1.0;
            }
            rows.push(r);
        }
    }
    let mut query = draw(&mut rng);
    if query.iter().all(|v| *v == 0.0) {
        query[0] = 1.0;
    }
    let k = rng.random_range(1..=m);
    Instance { rows, query, k }
}

fn features(rows: &[Vec<f64>]) -> FeatureMatrix {
    let d = rows[0].len();
    let data = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let ids = (0..rows.len()).map(|i| format!("item{i}")).collect();
    let labels = (0..rows.len()).map(|i| SynsetRef::new(format!("c{}", i % 7)).unwrap()).collect();
    FeatureMatrix::new(data, ids, Some(labels)).unwrap()
}

fn oracle_distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Metric::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            1.0 - dot / (na * nb)
        }
    }
}

/// Full sort by (distance, index).
fn oracle_knn(rows: &[Vec<f64>], q: &[f64], k: usize, metric: Metric) -> (Vec<usize>, Vec<f64>) {
    let mut all: Vec<(f64, usize)> = rows.iter().enumerate().map(|(i, r)| (oracle_distance(r, q, metric), i)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    (all.iter().map(|p| p.1).collect(), all.iter().map(|p| p.0).collect())
}

fn sizes() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=500, 1usize..=32, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_full_sort((m, d, seed) in sizes()) {
        for (metric, integer) in [(Metric::Euclidean, false), (Metric::Euclidean, true), (Metric::Cosine, false)] {
            let inst = instance(m, d, seed, integer);
            let index = LatentIndex::build(&features(&inst.rows), metric).unwrap();
            let got = index.query_knn(&inst.query, inst.k).unwrap();
            let (idx, dist) = oracle_knn(&inst.rows, &inst.query, inst.k, metric);
            prop_assert_eq!(&got.indices, &idx, "{:?}", metric);
            for (a, b) in got.distances.iter().zip(&dist) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn growing_k_keeps_prefix((m, d, seed) in sizes(), extra in 0usize..50) {
        let inst = instance(m, d, seed, true);
        let index = LatentIndex::build(&features(&inst.rows), Metric::Euclidean).unwrap();
        let small = index.query_knn(&inst.query, inst.k).unwrap();
        let large = index.query_knn(&inst.query, (inst.k + extra).min(m)).unwrap();
        prop_assert_eq!(&small.indices[..], &large.indices[..inst.k]);
    }

    #[test]
    fn euclidean_translation_invariance((m, d, seed) in sizes(), shift in -10i32..10) {
        // integer data and shifts keep every distance bit-identical
        let inst = instance(m, d, seed, true);
        let base = LatentIndex::build(&features(&inst.rows), Metric::Euclidean).unwrap();
        let shift = f64::from(shift);
        let moved: Vec<Vec<f64>> = inst.rows.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
        let q: Vec<f64> = inst.query.iter().map(|v| v + shift).collect();
        let shifted = LatentIndex::build(&features(&moved), Metric::Euclidean).unwrap();
        prop_assert_eq!(
            base.query_knn(&inst.query, inst.k).unwrap().indices,
            shifted.query_knn(&q, inst.k).unwrap().indices
        );
    }

    #[test]
    fn cosine_scale_invariance((m, d, seed) in sizes(), scale in 1e-3f64..1e3) {
        let inst = instance(m, d, seed, false);
        let base = LatentIndex::build(&features(&inst.rows), Metric::Cosine).unwrap();
        let scaled_rows: Vec<Vec<f64>> = inst
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().map(|v| v * scale * (1.0 + i as f64)).collect())
            .collect();
        let scaled = LatentIndex::build(&features(&scaled_rows), Metric::Cosine).unwrap();
        let a = base.distances(&inst.query).unwrap();
        let b = scaled.distances(&inst.query).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn toy_set_by_hand() {
    let rows = vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]];
    let index = LatentIndex::build(&features(&rows), Metric::Euclidean).unwrap();
    let got = index.query_knn(&[1.0, 0.0], 2).unwrap();
    assert_eq!(got.indices, vec![0, 1]);
    assert_eq!(got.distances, vec![1.0, 2.0]);
}
