//! Multi-output ridge regression from voxel patterns to latent features.
//!
//! Minimises `Σ_s ‖W·x(s) − f(s)‖² + λ‖W‖²_F` in closed form. With `X` as
//! N×V trials and `F` as N×D targets the weights satisfy the normal equations
//! `W (XᵀX + λI) = FᵀX`. Either the V×V system is solved directly, or the
//! N×N one through `W = Fᵀ (XXᵀ + λI)⁻¹ X`, whichever is smaller. Both are
//! symmetric positive definite for λ > 0 and are factored with Cholesky.
//!
//! With an intercept, `X` and `F` are mean-centred first and the intercept is
//! `f̄ − W x̄`; without one the objective is exactly the uncentred form.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adapt::{column_moments, MomentPair};
use crate::dataio::{FeatureMatrix, FmxFile, TrialMatrix};
use crate::error::{Error, Result};

/// Which linear system to factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolvePath {
    /// The smaller of the two.
    #[default]
    Auto,
    /// V×V: `(XᵀX + λI) Wᵀ = XᵀF`.
    Primal,
    /// N×N: `W = ((XXᵀ + λI)⁻¹ F)ᵀ X`.
    Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    /// D features × V voxels.
    pub weights: DMatrix<f64>,
    pub intercept: Option<DVector<f64>>,
    pub lambda: f64,
    /// Moments of the fitted targets.
    pub train_features: MomentPair,
    /// Moments of the model's own predictions on its training rows.
    pub train_predictions: Option<MomentPair>,
}

impl RidgeModel {
    pub fn features(&self) -> usize {
        self.weights.nrows()
    }

    pub fn voxels(&self) -> usize {
        self.weights.ncols()
    }

    /// `N×V → N×D`.
    pub fn predict_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.voxels() {
            return Err(Error::Shape(format!(
                "input has {} voxels, model expects {}",
                x.ncols(),
                self.voxels()
            )));
        }
        let mut out = x * self.weights.transpose();
        if let Some(b) = &self.intercept {
            for mut row in out.row_iter_mut() {
                row += b.transpose();
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let ids = (0..self.features()).map(|j| format!("f{j}")).collect();
        let mut f = FmxFile::from_matrix(&self.weights, ids, None);
        let vec = |v: &DVector<f64>| Value::from(v.iter().copied().collect::<Vec<f64>>());
        f.extra.insert("lambda".into(), self.lambda.into());
        f.extra.insert(
            "intercept".into(),
            self.intercept.as_ref().map_or(Value::Null, vec),
        );
        f.extra.insert("train_mean".into(), vec(&self.train_features.mean));
        f.extra.insert("train_std".into(), vec(&self.train_features.std));
        let (pm, ps) = match &self.train_predictions {
            Some(m) => (vec(&m.mean), vec(&m.std)),
            None => (Value::Null, Value::Null),
        };
        f.extra.insert("train_pred_mean".into(), pm);
        f.extra.insert("train_pred_std".into(), ps);
        f.write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = FmxFile::read(path)?;
        let d = f.rows;
        let header_err = |msg: String| Error::Header {
            path: path.to_path_buf(),
            msg,
        };
        let vector = |key: &str, required: bool| -> Result<Option<DVector<f64>>> {
            match f.extra.get(key) {
                None | Some(Value::Null) if !required => Ok(None),
                Some(Value::Array(items)) => {
                    let v = items
                        .iter()
                        .map(|x| x.as_f64())
                        .collect::<Option<Vec<f64>>>()
                        .ok_or_else(|| header_err(format!("\"{key}\" must hold numbers")))?;
                    if v.len() != d {
                        return Err(header_err(format!(
                            "\"{key}\" has {} entries for {d} features",
                            v.len()
                        )));
                    }
                    Ok(Some(DVector::from_vec(v)))
                }
                _ => Err(header_err(format!("missing or invalid \"{key}\""))),
            }
        };
        let lambda = f.extra_f64("lambda", path)?;
        let intercept = vector("intercept", false)?;
        let train_features =
            MomentPair::new(vector("train_mean", true)?.unwrap(), vector("train_std", true)?.unwrap())?;
        let train_predictions = match (vector("train_pred_mean", false)?, vector("train_pred_std", false)?) {
            (Some(m), Some(s)) => Some(MomentPair::new(m, s)?),
            _ => None,
        };
        Ok(RidgeModel {
            weights: f.matrix(),
            intercept,
            lambda,
            train_features,
            train_predictions,
        })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )))
    }
}

/// Cholesky solve of `a · z = b`, refusing numerically singular `a`.
fn spd_solve(a: DMatrix<f64>, b: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let scale = a.diagonal().amax();
    let chol = Cholesky::new(a).ok_or(Error::Singular { lambda })?;
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|d| d * d)
        .fold(f64::INFINITY, f64::min);
    if !(min_pivot > scale * n as f64 * f64::EPSILON) {
        return Err(Error::Singular { lambda });
    }
    Ok(chol.solve(b))
}

/// Weights for the uncentred problem.
pub fn solve_weights(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    lambda: f64,
    path: SolvePath,
) -> Result<DMatrix<f64>> {
    check_lambda(lambda)?;
    if x.nrows() != f.nrows() {
        return Err(Error::Shape(format!(
            "{} trial rows but {} feature rows",
            x.nrows(),
            f.nrows()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    let (n, v) = x.shape();
    let primal = match path {
        SolvePath::Auto => v <= n,
        SolvePath::Primal => true,
        SolvePath::Kernel => false,
    };
    if primal {
        let mut gram = x.tr_mul(x);
        for i in 0..v {
            gram[(i, i)] += lambda;
        }
        let z = spd_solve(gram, &x.tr_mul(f), lambda)?;
        Ok(z.transpose())
    } else {
        let mut kernel = x * x.transpose();
        for i in 0..n {
            kernel[(i, i)] += lambda;
        }
        let alpha = spd_solve(kernel, f, lambda)?;
        Ok(alpha.tr_mul(x))
    }
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}

fn centred(m: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= mean.transpose();
    }
    out
}

fn moments_or_zero_std(m: &DMatrix<f64>) -> MomentPair {
    column_moments(m).unwrap_or_else(|_| MomentPair {
        mean: column_means(m),
        std: DVector::zeros(m.ncols()),
    })
}

pub fn fit_matrices(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    lambda: f64,
    with_intercept: bool,
    path: SolvePath,
) -> Result<RidgeModel> {
    if x.iter().chain(f.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ridge inputs".into()));
    }
    let (weights, intercept) = if with_intercept {
        if x.nrows() != f.nrows() || x.nrows() == 0 {
            // let solve_weights report it
            return solve_weights(x, f, lambda, path).map(|_| unreachable!());
        }
        let xm = column_means(x);
        let fm = column_means(f);
        let w = solve_weights(&centred(x, &xm), &centred(f, &fm), lambda, path)?;
        let b = &fm - &w * &xm;
        (w, Some(b))
    } else {
        (solve_weights(x, f, lambda, path)?, None)
    };
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { lambda });
    }
    let mut model = RidgeModel {
        weights,
        intercept,
        lambda,
        train_features: moments_or_zero_std(f),
        train_predictions: None,
    };
    if x.nrows() >= 2 {
        model.train_predictions = Some(moments_or_zero_std(&model.predict_matrix(x)?));
    }
    Ok(model)
}

/// Fits `W` on row-aligned trials and features.
pub fn fit(
    x: &TrialMatrix,
    f: &FeatureMatrix,
    lambda: f64,
    with_intercept: bool,
) -> Result<RidgeModel> {
    fit_matrices(&x.data, &f.data, lambda, with_intercept, SolvePath::Auto)
}

/// Predicted features for every trial; item ids are the image ids and labels
/// are copied from the trials.
pub fn predict(model: &RidgeModel, x: &TrialMatrix) -> Result<FeatureMatrix> {
    FeatureMatrix::new(
        model.predict_matrix(&x.data)?,
        x.image_ids.clone(),
        Some(x.labels.clone()),
    )
}

/// `1e-3, 1e-2, …, 1e5`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-3..=5).map(|e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub lambdas: Vec<f64>,
    /// Mean squared feature error on the validation rows, per candidate.
    pub validation_losses: Vec<f64>,
    pub chosen_index: usize,
    pub chosen_lambda: f64,
    pub train_rows: usize,
    pub validation_rows: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSearchOptions {
    /// Fraction of rows used for fitting; the rest validates.
    pub split_fraction: f64,
    pub seed: u64,
    pub with_intercept: bool,
}

impl Default for GridSearchOptions {
    fn default() -> Self {
        GridSearchOptions {
            split_fraction: 0.9,
            seed: 0,
            with_intercept: true,
        }
    }
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Seeded shuffle → train/validation split, one fit per λ, pick the lowest
/// validation MSE (ties go to the larger λ), then refit on all rows.
pub fn grid_search_matrices(
    x: &DMatrix<f64>,
    f: &DMatrix<f64>,
    lambdas: &[f64],
    opts: GridSearchOptions,
) -> Result<(RidgeModel, GridSearchReport)> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid search needs at least 2 candidate lambdas, got {}",
            lambdas.len()
        )));
    }
    lambdas.iter().try_for_each(|&l| check_lambda(l))?;
    if !(opts.split_fraction > 0.0 && opts.split_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction must lie in (0, 1), got {}",
            opts.split_fraction
        )));
    }
    if x.nrows() != f.nrows() {
        return Err(Error::Shape(format!(
            "{} trial rows but {} feature rows",
            x.nrows(),
            f.nrows()
        )));
    }
    let n = x.nrows();
    let n_train = ((n as f64) * opts.split_fraction).round() as usize;
    let n_val = n - n_train.min(n);
    if n_train == 0 || n_val == 0 {
        return Err(Error::EmptySplit {
            train: n_train.min(n),
            validation: n_val,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    let (train, val) = order.split_at(n_train);
    let (xt, ft) = (select_rows(x, train), select_rows(f, train));
    let (xv, fv) = (select_rows(x, val), select_rows(f, val));

    let outcomes: Vec<Result<f64>> = lambdas
        .par_iter()
        .map(|&lambda| {
            let model = fit_matrices(&xt, &ft, lambda, opts.with_intercept, SolvePath::Auto)?;
            let err = model.predict_matrix(&xv)? - &fv;
            Ok(err.norm_squared() / err.len() as f64)
        })
        .collect();
    let mut losses = Vec::with_capacity(lambdas.len());
    for (outcome, &lambda) in outcomes.into_iter().zip(lambdas) {
        let loss = outcome?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { lambda });
        }
        losses.push(loss);
    }

    let mut chosen = 0;
    for i in 1..lambdas.len() {
        let better = losses[i] < losses[chosen]
            || (losses[i] == losses[chosen] && lambdas[i] >= lambdas[chosen]);
        if better {
            chosen = i;
        }
    }
    let model = fit_matrices(x, f, lambdas[chosen], opts.with_intercept, SolvePath::Auto)?;
    let report = GridSearchReport {
        lambdas: lambdas.to_vec(),
        validation_losses: losses,
        chosen_index: chosen,
        chosen_lambda: lambdas[chosen],
        train_rows: n_train,
        validation_rows: n_val,
        seed: opts.seed,
    };
    Ok((model, report))
}

pub fn grid_search(
    x: &TrialMatrix,
    f: &FeatureMatrix,
    lambdas: &[f64],
    opts: GridSearchOptions,
) -> Result<(RidgeModel, GridSearchReport)> {
    grid_search_matrices(&x.data, &f.data, lambdas, opts)
}
