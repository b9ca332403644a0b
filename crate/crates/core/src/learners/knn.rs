//! k-nearest-neighbour classification with Minkowski distance (p = 1 or 2).

use serde::{Deserialize, Serialize};

use super::class_values;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct KnnParams {
    pub k: usize,
    pub p: u8,
    pub train: Matrix,
    pub labels: Vec<f64>,
    pub classes: Vec<f64>,
}

pub(crate) fn fit(features: &Matrix, labels: &[f64], k: usize, p: u8) -> KnnParams {
    KnnParams {
        // More neighbours than training points degrades to all-points voting.
        k: k.min(features.n_rows()),
        p,
        train: features.clone(),
        labels: labels.to_vec(),
        classes: class_values(labels),
    }
}

/// Sum of |dx|^p; monotone in the Minkowski distance, so ordering and ties
/// are unchanged by skipping the root.
fn pre_distance(a: &[f64], b: &[f64], p: u8) -> f64 {
    match p {
        1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        2 => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        _ => unreachable!("p restricted to 1 or 2 at fit time"),
    }
}

pub(crate) fn predict(params: &KnnParams, features: &Matrix) -> Vec<f64> {
    features
        .iter_rows()
        .map(|query| {
            let mut dists: Vec<(f64, usize)> = params
                .train
                .iter_rows()
                .enumerate()
                .map(|(i, row)| (pre_distance(query, row, params.p), i))
                .collect();
            // Distance ties break toward the smaller training index.
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; params.classes.len()];
            for &(_, idx) in dists.iter().take(params.k) {
                let class = params.labels[idx];
                let ci = params.classes.iter().position(|&c| c == class).unwrap();
                votes[ci] += 1;
            }
            // Vote ties break toward the smaller class label.
            let mut best = 0;
            for (ci, &v) in votes.iter().enumerate().skip(1) {
                if v > votes[best] {
                    best = ci;
                }
            }
            params.classes[best]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_nn_reproduces_training_labels() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.5]]);
        let y = [0.0, 1.0, 2.0];
        let p = fit(&x, &y, 1, 2);
        assert_eq!(predict(&p, &x), y.to_vec());
    }

    #[test]
    fn three_nn_majority_vote() {
        // Neighbours of 0.05 are at 0, 0.1 and 10; vote 2xA to 1xB.
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![10.0]]);
        let y = [0.0, 0.0, 1.0];
        let p = fit(&x, &y, 3, 2);
        let q = Matrix::from_rows(&[vec![0.05]]);
        assert_eq!(predict(&p, &q), vec![0.0]);
    }

    #[test]
    fn distance_tie_breaks_by_training_index() {
        // Two equidistant training points with different labels; index 0 wins.
        let x = Matrix::from_rows(&[vec![1.0], vec![-1.0]]);
        let y = [7.0, 3.0];
        let p = fit(&x, &y, 1, 2);
        let q = Matrix::from_rows(&[vec![0.0]]);
        assert_eq!(predict(&p, &q), vec![7.0]);
    }

    #[test]
    fn vote_tie_breaks_by_smaller_class() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]);
        let y = [5.0, 2.0];
        let p = fit(&x, &y, 2, 1);
        let q = Matrix::from_rows(&[vec![0.2]]);
        assert_eq!(predict(&p, &q), vec![2.0]);
    }

    #[test]
    fn k_clamped_to_training_size() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let p = fit(&x, &[0.0, 1.0], 30, 2);
        assert_eq!(p.k, 2);
    }

    #[test]
    fn manhattan_and_euclidean_can_disagree() {
        // Query at origin: point a = (2, 2) vs b = (0, 3).
        // L1: a = 4 > b = 3; L2 (squared): a = 8 < b = 9.
        let x = Matrix::from_rows(&[vec![2.0, 2.0], vec![0.0, 3.0]]);
        let y = [0.0, 1.0];
        let q = Matrix::from_rows(&[vec![0.0, 0.0]]);
        let p1 = fit(&x, &y, 1, 1);
        let p2 = fit(&x, &y, 1, 2);
        assert_eq!(predict(&p1, &q), vec![1.0]);
        assert_eq!(predict(&p2, &q), vec![0.0]);
    }
}
