//! One-vs-rest passive-aggressive linear classifier (PA-I update).
//!
//! Each class gets a binary hinge-loss learner updated in a single pass
//! over the training data in seeded-shuffle order. On a margin violation
//! the step size is tau = min(C, loss / ||x||^2), with the intercept
//! treated as an implicit always-one feature.

use serde::{Deserialize, Serialize};

use super::{argmax_first, class_values, LearnError};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct PaParams {
    pub classes: Vec<f64>,
    /// class x feature weight matrix.
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

pub(crate) fn fit(
    features: &Matrix,
    labels: &[f64],
    c: f64,
    seed: u64,
) -> Result<PaParams, LearnError> {
    let classes = class_values(labels);
    if classes.len() < 2 {
        return Err(LearnError::SingleClassTraining(
            "PassiveAggressive".to_string(),
        ));
    }
    let n_features = features.n_cols();
    let mut weights = Matrix::zeros(classes.len(), n_features);
    let mut biases = vec![0.0; classes.len()];
    let mut order_rng = rng::rng_from_seed(seed);
    let order = rng::shuffled_indices(features.n_rows(), &mut order_rng);
    for &i in &order {
        let x = features.row(i);
        let norm_sq: f64 = x.iter().map(|v| v * v).sum::<f64>() + 1.0; // + intercept
        for (ci, &class) in classes.iter().enumerate() {
            let y = if labels[i] == class { 1.0 } else { -1.0 };
            let margin: f64 =
                x.iter().zip(weights.row(ci)).map(|(a, w)| a * w).sum::<f64>() + biases[ci];
            let loss = (1.0 - y * margin).max(0.0);
            if loss > 0.0 {
                let tau = c.min(loss / norm_sq);
                for (j, &xj) in x.iter().enumerate() {
                    let w = weights.get(ci, j);
                    weights.set(ci, j, w + tau * y * xj);
                }
                biases[ci] += tau * y;
            }
        }
    }
    Ok(PaParams {
        classes,
        weights,
        biases,
    })
}

pub(crate) fn predict(params: &PaParams, features: &Matrix) -> Vec<f64> {
    features
        .iter_rows()
        .map(|x| {
            let scores: Vec<f64> = (0..params.classes.len())
                .map(|ci| {
                    x.iter()
                        .zip(params.weights.row(ci))
                        .map(|(a, w)| a * w)
                        .sum::<f64>()
                        + params.biases[ci]
                })
                .collect();
            params.classes[argmax_first(&scores)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hinge(w: &[f64], b: f64, x: &[f64], y: f64) -> f64 {
        let margin: f64 = x.iter().zip(w).map(|(a, v)| a * v).sum::<f64>() + b;
        (1.0 - y * margin).max(0.0)
    }

    #[test]
    fn single_update_zeroes_hinge_loss_with_large_c() {
        // One binary example, one pass: with C large, tau = loss / ||x||^2
        // drives the example's hinge loss to exactly zero.
        let x = vec![2.0, -1.0];
        let y = 1.0;
        let norm_sq: f64 = x.iter().map(|v| v * v).sum::<f64>() + 1.0;
        let loss0 = 1.0; // weights start at zero
        let tau = (loss0 / norm_sq).min(1e10);
        let w: Vec<f64> = x.iter().map(|v| tau * y * v).collect();
        let b = tau * y;
        assert!(hinge(&w, b, &x, y).abs() < 1e-12);
    }

    #[test]
    fn small_c_reduces_but_may_not_zero_loss() {
        let x = vec![2.0, -1.0];
        let y = 1.0;
        let c: f64 = 0.01;
        let norm_sq: f64 = x.iter().map(|v| v * v).sum::<f64>() + 1.0;
        let tau = c.min(1.0 / norm_sq);
        let w: Vec<f64> = x.iter().map(|v| tau * y * v).collect();
        let b = tau * y;
        let after = hinge(&w, b, &x, y);
        assert!(after < 1.0);
        assert!(after > 0.0);
    }

    #[test]
    fn separable_problem_classifies_training_set() {
        let x = Matrix::from_rows(&[
            vec![-2.0, -2.1],
            vec![-1.8, -2.4],
            vec![-2.2, -1.9],
            vec![2.0, 2.1],
            vec![1.9, 2.3],
            vec![2.2, 1.8],
        ]);
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let p = fit(&x, &y, 1.0, 3).unwrap();
        assert_eq!(predict(&p, &x), y.to_vec());
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        assert_eq!(
            fit(&x, &[1.0, 1.0], 1.0, 0),
            Err(LearnError::SingleClassTraining("PassiveAggressive".into()))
        );
    }

    #[test]
    fn deterministic_in_seed() {
        let x = Matrix::from_rows(&[
            vec![0.1, 1.0],
            vec![-0.4, 0.2],
            vec![1.2, -0.5],
            vec![-1.0, -1.0],
        ]);
        let y = [0.0, 1.0, 0.0, 1.0];
        let a = fit(&x, &y, 0.5, 11).unwrap();
        let b = fit(&x, &y, 0.5, 11).unwrap();
        assert_eq!(a, b);
    }
}
