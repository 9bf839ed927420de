use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use semdecode::ridge::{fit_matrices, solve_weights, SolvePath};

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Gauss-Jordan elimination with partial pivoting.
fn dense_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = DMatrix::<f64>::identity(n, n);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs())).unwrap();
        m.swap_rows(c, p);
        inv.swap_rows(c, p);
        let pivot = m[(c, c)];
        for j in 0..n {
            m[(c, j)] /= pivot;
            inv[(c, j)] /= pivot;
        }
        for r in 0..n {
            if r != c {
                let factor = m[(r, c)];
                for j in 0..n {
                    m[(r, j)] -= factor * m[(c, j)];
                    inv[(r, j)] -= factor * inv[(c, j)];
                }
            }
        }
    }
    inv
}

fn centre(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..m.ncols() {
        let mean = m.column(j).sum() / m.nrows() as f64;
        out.column_mut(j).add_scalar_mut(-mean);
    }
    out
}

fn gram_plus(x: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let mut g = x.transpose() * x;
    for i in 0..g.nrows() {
        g[(i, i)] += lambda;
    }
    g
}

fn objective(x: &DMatrix<f64>, f: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> f64 {
    (x * w.transpose() - f).norm_squared() + lambda * w.norm_squared()
}

fn instance() -> impl Strategy<Value = (usize, usize, usize, f64, u64)> {
    (1usize..=30, 1usize..=30, 1usize..=30, -2.0f64..2.0, any::<u64>())
        .prop_map(|(n, v, d, log_l, seed)| (n, v, d, 10f64.powf(log_l), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normal_equations_and_inverse_oracle((n, v, d, lambda, seed) in instance(), intercept in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, v, &mut rng);
        let f = gaussian(n, d, &mut rng);
        let model = fit_matrices(&x, &f, lambda, intercept, SolvePath::Auto).unwrap();
        let (xc, fc) = if intercept { (centre(&x), centre(&f)) } else { (x.clone(), f.clone()) };
        let w = &model.weights;
        let rhs = fc.transpose() * &xc;
        let residual = (w * gram_plus(&xc, lambda) - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
        prop_assert!(residual < 1e-8, "relative residual {residual}");
        let oracle = &rhs * dense_inverse(&gram_plus(&xc, lambda));
        let diff = (w - oracle).amax();
        prop_assert!(diff < 1e-8, "max |W - oracle| = {diff}");
    }

    #[test]
    fn primal_and_kernel_agree((n, v, d, lambda, seed) in instance()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, v, &mut rng);
        let f = gaussian(n, d, &mut rng);
        let primal = solve_weights(&x, &f, lambda, SolvePath::Primal).unwrap();
        let kernel = solve_weights(&x, &f, lambda, SolvePath::Kernel).unwrap();
        prop_assert!((primal - kernel).amax() < 1e-7);
    }

    #[test]
    fn training_residual_grows_with_lambda((n, v, d, lambda, seed) in instance(), factor in 1.0f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, v, &mut rng);
        let f = gaussian(n, d, &mut rng);
        let small = solve_weights(&x, &f, lambda, SolvePath::Auto).unwrap();
        let large = solve_weights(&x, &f, lambda * factor, SolvePath::Auto).unwrap();
        let r_small = (&x * small.transpose() - &f).norm();
        let r_large = (&x * large.transpose() - &f).norm();
        prop_assert!(r_large >= r_small - 1e-10 * f.norm(), "{r_small} > {r_large}");
    }

    #[test]
    fn perturbation_never_lowers_objective((n, v, d, lambda, seed) in instance()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gaussian(n, v, &mut rng);
        let f = gaussian(n, d, &mut rng);
        let w = solve_weights(&x, &f, lambda, SolvePath::Auto).unwrap();
        let base = objective(&x, &f, &w, lambda);
        for _ in 0..5 {
            let mut delta = gaussian(d, v, &mut rng);
            delta *= 1e-3 / delta.norm();
            prop_assert!(objective(&x, &f, &(&w + &delta), lambda) >= base);
        }
    }
}

#[test]
fn twenty_by_five_matches_inverse_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let x = gaussian(20, 5, &mut rng);
    let f = gaussian(20, 2, &mut rng);
    let w = solve_weights(&x, &f, 0.7, SolvePath::Auto).unwrap();
    let oracle = f.transpose() * &x * dense_inverse(&gram_plus(&x, 0.7));
    assert!((w - oracle).amax() < 1e-8);
}
