//! Per-feature standardization to zero mean and unit sample deviation.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: f64,
    pub sd: f64,
}

/// Per-feature mean and sample standard deviation (n - 1 denominator) of a
/// training matrix. Constant columns get sd = 1 so they standardize to
/// all-zeros instead of dividing by zero; a single-row matrix is treated as
/// all-constant.
pub fn standardize_fit(train: &Matrix) -> Vec<FeatureStats> {
    let n = train.n_rows();
    assert!(n > 0, "empty training matrix");
    (0..train.n_cols())
        .map(|j| {
            let mean = (0..n).map(|i| train.get(i, j)).sum::<f64>() / n as f64;
            let sd = if n < 2 {
                1.0
            } else {
                let ss: f64 = (0..n).map(|i| (train.get(i, j) - mean).powi(2)).sum();
                let sd = (ss / (n - 1) as f64).sqrt();
                if sd == 0.0 {
                    1.0
                } else {
                    sd
                }
            };
            FeatureStats { mean, sd }
        })
        .collect()
}

/// Applies fitted stats: (x - mean) / sd per feature.
pub fn standardize_apply(stats: &[FeatureStats], features: &Matrix) -> Matrix {
    assert_eq!(stats.len(), features.n_cols(), "feature count mismatch");
    let mut out = Matrix::zeros(features.n_rows(), features.n_cols());
    for i in 0..features.n_rows() {
        for (j, s) in stats.iter().enumerate() {
            out.set(i, j, (features.get(i, j) - s.mean) / s.sd);
        }
    }
    out
}
