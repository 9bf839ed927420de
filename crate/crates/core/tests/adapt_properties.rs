use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use semdecode::adapt::{compute_moments, moment_match, MomentPair};
use semdecode::dataio::FeatureMatrix;

fn matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> FeatureMatrix {
    let scales: Vec<f64> = (0..cols).map(|_| rng.random_range(0.1..10.0)).collect();
    let offsets: Vec<f64> = (0..cols).map(|_| rng.random_range(-5.0..5.0)).collect();
    let data = DMatrix::from_fn(rows, cols, |_, j| {
        let z: f64 = StandardNormal.sample(rng);
        z * scales[j] + offsets[j]
    });
    let ids = (0..rows).map(|i| i.to_string()).collect();
    FeatureMatrix::new(data, ids, None).unwrap()
}

fn moments(cols: usize, rng: &mut ChaCha8Rng) -> MomentPair {
    MomentPair::new(
        DVector::from_fn(cols, |_, _| rng.random_range(-3.0..3.0)),
        DVector::from_fn(cols, |_, _| rng.random_range(0.05..4.0)),
    )
    .unwrap()
}

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..40, 1usize..20, any::<u64>())
}

proptest! {
    #[test]
    fn adapted_columns_have_target_moments((n, d, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = matrix(n, d, &mut rng);
        let target = moments(d, &mut rng);
        let y = moment_match(&x, &compute_moments(&x).unwrap(), &target).unwrap();
        let got = compute_moments(&y).unwrap();
        prop_assert!((&got.mean - &target.mean).amax() < 1e-9);
        prop_assert!((&got.std - &target.std).amax() < 1e-9);
    }

    #[test]
    fn matching_to_own_moments_is_identity((n, d, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = matrix(n, d, &mut rng);
        let m = compute_moments(&x).unwrap();
        let y = moment_match(&x, &m, &m).unwrap();
        prop_assert!((&y.data - &x.data).amax() <= 1e-12);
    }

    #[test]
    fn composition_equals_direct((n, d, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = matrix(n, d, &mut rng);
        let (a, b) = (moments(d, &mut rng), moments(d, &mut rng));
        let source = compute_moments(&x).unwrap();
        let via_a = moment_match(&x, &source, &a).unwrap();
        let two_step = moment_match(&via_a, &compute_moments(&via_a).unwrap(), &b).unwrap();
        let direct = moment_match(&x, &source, &b).unwrap();
        prop_assert!((&two_step.data - &direct.data).amax() < 1e-9);
    }

    #[test]
    fn within_column_order_is_preserved((n, d, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = matrix(n, d, &mut rng);
        let y = moment_match(&x, &compute_moments(&x).unwrap(), &moments(d, &mut rng)).unwrap();
        for j in 0..d {
            for a in 0..n {
                for b in 0..n {
                    if x.data[(a, j)] < x.data[(b, j)] {
                        prop_assert!(y.data[(a, j)] < y.data[(b, j)]);
                    }
                }
            }
        }
    }
}
