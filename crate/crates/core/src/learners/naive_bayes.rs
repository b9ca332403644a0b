//! Gaussian and Bernoulli naive Bayes classifiers.

use serde::{Deserialize, Serialize};

use super::{argmax_first, class_values};
use crate::matrix::Matrix;

/// Floor added to every class-conditional variance: 1e-9 times the largest
/// per-feature variance of the training matrix, guarding zero-variance
/// singularities.
const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct GaussianNbParams {
    pub classes: Vec<f64>,
    pub log_priors: Vec<f64>,
    /// class x feature means.
    pub means: Matrix,
    /// class x feature variances, smoothed.
    pub variances: Matrix,
}

pub(crate) fn fit_gaussian(features: &Matrix, labels: &[f64]) -> GaussianNbParams {
    let classes = class_values(labels);
    let (n, f) = (features.n_rows(), features.n_cols());
    // Population variances (n denominator) of the full training matrix set
    // the smoothing scale.
    let mut max_var = 0.0f64;
    for j in 0..f {
        let col = features.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        max_var = max_var.max(var);
    }
    let epsilon = if max_var > 0.0 {
        VAR_SMOOTHING * max_var
    } else {
        VAR_SMOOTHING
    };
    let mut means = Matrix::zeros(classes.len(), f);
    let mut variances = Matrix::zeros(classes.len(), f);
    let mut log_priors = Vec::with_capacity(classes.len());
    for (ci, &c) in classes.iter().enumerate() {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        log_priors.push((rows.len() as f64 / n as f64).ln());
        for j in 0..f {
            let vals: Vec<f64> = rows.iter().map(|&i| features.get(i, j)).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            means.set(ci, j, mean);
            variances.set(ci, j, var + epsilon);
        }
    }
    GaussianNbParams {
        classes,
        log_priors,
        means,
        variances,
    }
}

pub(crate) fn predict_gaussian(params: &GaussianNbParams, features: &Matrix) -> Vec<f64> {
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    features
        .iter_rows()
        .map(|row| {
            let scores: Vec<f64> = (0..params.classes.len())
                .map(|ci| {
                    let mut ll = params.log_priors[ci];
                    for (j, &x) in row.iter().enumerate() {
                        let mean = params.means.get(ci, j);
                        let var = params.variances.get(ci, j);
                        ll += -0.5 * (ln_2pi + var.ln()) - (x - mean).powi(2) / (2.0 * var);
                    }
                    ll
                })
                .collect();
            params.classes[argmax_first(&scores)]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct BernoulliNbParams {
    pub classes: Vec<f64>,
    pub log_priors: Vec<f64>,
    /// class x feature probability of the binarized feature being 1,
    /// Laplace-smoothed with alpha = 1.
    pub feature_prob: Matrix,
}

/// Features are binarized at 0 (after standardization, 0 is the training
/// mean) and modeled as class-conditional Bernoulli draws.
pub(crate) fn fit_bernoulli(features: &Matrix, labels: &[f64]) -> BernoulliNbParams {
    let classes = class_values(labels);
    let (n, f) = (features.n_rows(), features.n_cols());
    let mut feature_prob = Matrix::zeros(classes.len(), f);
    let mut log_priors = Vec::with_capacity(classes.len());
    for (ci, &c) in classes.iter().enumerate() {
        let rows: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        log_priors.push((rows.len() as f64 / n as f64).ln());
        for j in 0..f {
            let ones = rows.iter().filter(|&&i| features.get(i, j) > 0.0).count();
            feature_prob.set(
                ci,
                j,
                (ones as f64 + 1.0) / (rows.len() as f64 + 2.0),
            );
        }
    }
    BernoulliNbParams {
        classes,
        log_priors,
        feature_prob,
    }
}

pub(crate) fn predict_bernoulli(params: &BernoulliNbParams, features: &Matrix) -> Vec<f64> {
    features
        .iter_rows()
        .map(|row| {
            let scores: Vec<f64> = (0..params.classes.len())
                .map(|ci| {
                    let mut ll = params.log_priors[ci];
                    for (j, &x) in row.iter().enumerate() {
                        let p = params.feature_prob.get(ci, j);
                        ll += if x > 0.0 { p.ln() } else { (1.0 - p).ln() };
                    }
                    ll
                })
                .collect();
            params.classes[argmax_first(&scores)]
        })
        .collect()
}
