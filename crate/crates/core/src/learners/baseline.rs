//! Uninformed baseline: always predicts the most frequent training class.

use serde::{Deserialize, Serialize};

use super::class_values;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct BaselineParams {
    pub modal_class: f64,
}

pub(crate) fn fit(labels: &[f64]) -> BaselineParams {
    let classes = class_values(labels);
    let mut best = classes[0];
    let mut best_count = 0usize;
    for &c in &classes {
        let count = labels.iter().filter(|&&l| l == c).count();
        // Strict comparison with ascending classes: count ties go to the
        // smaller class label.
        if count > best_count {
            best_count = count;
            best = c;
        }
    }
    BaselineParams { modal_class: best }
}

pub(crate) fn predict(params: &BaselineParams, features: &Matrix) -> Vec<f64> {
    vec![params.modal_class; features.n_rows()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_rule() {
        let p = fit(&[0.0, 0.0, 1.0]);
        assert_eq!(p.modal_class, 0.0);
        let x = Matrix::from_rows(&[vec![9.0], vec![-2.0], vec![0.3]]);
        assert_eq!(predict(&p, &x), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn count_tie_goes_to_smaller_class() {
        let p = fit(&[2.0, 1.0, 2.0, 1.0]);
        assert_eq!(p.modal_class, 1.0);
    }
}
