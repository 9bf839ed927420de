//! Featurewise moment matching between domains.
//!
//! Predicted test features are re-standardised column by column so that
//! their mean and standard deviation become those of a reference (by default
//! the true training features).

use nalgebra::{DMatrix, DVector};

use crate::dataio::FeatureMatrix;
use crate::error::{Error, Result};

/// Columns whose source std is at or below this are treated as constant.
pub const DEGENERATE_STD_EPS: f64 = 1e-12;

/// Per-feature mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    pub mean: DVector<f64>,
    pub std: DVector<f64>,
}

impl MomentPair {
    pub fn new(mean: DVector<f64>, std: DVector<f64>) -> Result<Self> {
        if mean.len() != std.len() {
            return Err(Error::Shape(format!(
                "{} means but {} stds",
                mean.len(),
                std.len()
            )));
        }
        if mean.iter().chain(std.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moments".into()));
        }
        if std.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidParameter("negative standard deviation".into()));
        }
        Ok(MomentPair { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Column means and sample (N−1) standard deviations of a raw matrix.
pub fn column_moments(m: &DMatrix<f64>) -> Result<MomentPair> {
    let n = m.nrows();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, found: n });
    }
    let mut mean = DVector::zeros(m.ncols());
    let mut std = DVector::zeros(m.ncols());
    for (j, col) in m.column_iter().enumerate() {
        let mu = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mu).powi(2)).sum();
        mean[j] = mu;
        std[j] = (ss / (n - 1) as f64).sqrt();
    }
    Ok(MomentPair { mean, std })
}

pub fn compute_moments(m: &FeatureMatrix) -> Result<MomentPair> {
    column_moments(&m.data)
}

/// Maps column `j` through `(x − source.mean[j]) / source.std[j] · target.std[j] + target.mean[j]`.
///
/// Columns where both pairs agree exactly are copied through untouched.
/// A column with (near) zero source std becomes `target.mean[j]` when the
/// target std is zero too; otherwise it is an error.
pub fn moment_match(
    predicted: &FeatureMatrix,
    source: &MomentPair,
    target: &MomentPair,
) -> Result<FeatureMatrix> {
    let d = predicted.dim();
    if source.dim() != d || target.dim() != d {
        return Err(Error::Shape(format!(
            "features have {d} columns, source moments {}, target moments {}",
            source.dim(),
            target.dim()
        )));
    }
    let degenerate: Vec<usize> = (0..d)
        .filter(|&j| source.std[j] <= DEGENERATE_STD_EPS && target.std[j] > 0.0)
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateColumns(degenerate));
    }

    let mut data = predicted.data.clone();
    for (j, mut col) in data.column_iter_mut().enumerate() {
        let (sm, ss, tm, ts) = (source.mean[j], source.std[j], target.mean[j], target.std[j]);
        if sm == tm && ss == ts {
            continue;
        }
        if ss <= DEGENERATE_STD_EPS {
            col.fill(tm);
        } else {
            col.apply(|x| *x = (*x - sm) / ss * ts + tm);
        }
    }
    FeatureMatrix::new(data, predicted.item_ids.clone(), predicted.labels.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(rows: usize, cols: usize, v: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(
            DMatrix::from_row_slice(rows, cols, v),
            (0..rows).map(|i| format!("i{i}")).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn moments_of_two_rows() {
        let m = compute_moments(&fm(2, 2, &[0.0, 0.0, 2.0, 2.0])).unwrap();
        assert_eq!(m.mean.as_slice(), &[1.0, 1.0]);
        assert!((m.std[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.std[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn repeated_row_has_zero_std() {
        let m = compute_moments(&fm(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0])).unwrap();
        assert_eq!(m.std.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn needs_two_rows() {
        assert!(matches!(
            compute_moments(&fm(1, 2, &[1.0, 2.0])),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn identity_when_source_equals_target() {
        let x = fm(3, 2, &[0.1, 5.0, -0.7, 2.0, 3.3, 1.0]);
        let m = MomentPair::new(DVector::from_vec(vec![0.3, -1.0]), DVector::from_vec(vec![2.0, 0.5])).unwrap();
        assert_eq!(moment_match(&x, &m, &m).unwrap(), x);
    }

    #[test]
    fn hand_computed_column() {
        // column [0, 2]: mean 1, sample std sqrt(2)
        let x = fm(2, 1, &[0.0, 2.0]);
        let src = compute_moments(&x).unwrap();
        let tgt = MomentPair::new(
            DVector::from_vec(vec![10.0]),
            DVector::from_vec(vec![2.0 * 2f64.sqrt()]),
        )
        .unwrap();
        let y = moment_match(&x, &src, &tgt).unwrap();
        assert!((y.data[(0, 0)] - 8.0).abs() < 1e-12);
        assert!((y.data[(1, 0)] - 12.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_to_constant_target() {
        let x = fm(3, 1, &[4.0, 4.0, 4.0]);
        let src = compute_moments(&x).unwrap();
        let tgt = MomentPair::new(DVector::from_vec(vec![-2.0]), DVector::from_vec(vec![0.0])).unwrap();
        let y = moment_match(&x, &src, &tgt).unwrap();
        assert_eq!(y.data.as_slice(), &[-2.0, -2.0, -2.0]);
    }

    #[test]
    fn constant_column_to_spread_target_is_error() {
        let x = fm(2, 2, &[4.0, 1.0, 4.0, 2.0]);
        let src = compute_moments(&x).unwrap();
        let tgt = MomentPair::new(DVector::from_vec(vec![0.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!(matches!(
            moment_match(&x, &src, &tgt),
            Err(Error::DegenerateColumns(ref c)) if c == &vec![0]
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let x = fm(2, 2, &[0.0, 1.0, 2.0, 3.0]);
        let m = MomentPair::new(DVector::zeros(1), DVector::zeros(1)).unwrap();
        assert!(matches!(moment_match(&x, &m, &m), Err(Error::Shape(_))));
    }
}
