//! Grid-search hyper-parameter tuning by k-fold cross-validation.
//!
//! The fold assignment is a seeded shuffle followed by a contiguous
//! partition into near-equal blocks, computed once and reused for every
//! grid point. The tuning score is mean accuracy over the validation folds.

use serde::{Deserialize, Serialize};

use super::{fit_with, predict, Grid, HyperParams, LearnError, StrategyDescriptor};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    /// Every evaluated grid point with its mean CV accuracy, in the
    /// deterministic iteration order (sorted hyper-parameter names,
    /// candidate lists in declared order, first name varying slowest).
    pub grid_points: Vec<(HyperParams, f64)>,
    pub winner: HyperParams,
    pub cv_seed: u64,
}

impl TuningReport {
    /// Report for a strategy without tunable hyper-parameters.
    pub fn untuned() -> Self {
        TuningReport {
            grid_points: Vec::new(),
            winner: HyperParams::new(),
            cv_seed: 0,
        }
    }
}

/// Cartesian product of the grid in deterministic order.
fn grid_points(grid: &Grid) -> Vec<HyperParams> {
    let keys: Vec<&String> = grid.keys().collect(); // BTreeMap: sorted
    let mut points = vec![HyperParams::new()];
    for key in keys {
        let mut next = Vec::with_capacity(points.len() * grid[key].len());
        for point in &points {
            for &value in &grid[key] {
                let mut p = point.clone();
                p.insert(key.clone(), value);
                next.push(p);
            }
        }
        points = next;
    }
    points
}

/// Contiguous fold boundaries over a shuffled index vector.
fn fold_slices(n: usize, folds: usize) -> Vec<(usize, usize)> {
    let base = n / folds;
    let rem = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < rem);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Exhaustive grid search over `grid`, scored by `folds`-fold CV accuracy.
///
/// Ties keep the first grid point in iteration order. The test data never
/// enters: callers pass the training portion only, and each fold fits on
/// the remaining folds (including per-fold standardization when the
/// strategy asks for it).
pub fn tune(
    descriptor: &StrategyDescriptor,
    grid: &Grid,
    features: &Matrix,
    labels: &[f64],
    folds: usize,
    seed: u64,
) -> Result<(HyperParams, TuningReport), LearnError> {
    if folds < 2 {
        return Err(LearnError::TooFewFolds(folds));
    }
    let n = features.n_rows();
    if n < folds {
        return Err(LearnError::TooFewSamples { n, folds });
    }
    if grid.is_empty() || grid.values().any(Vec::is_empty) {
        return Err(LearnError::EmptyGrid);
    }
    let mut cv_rng = rng::rng_from_seed(seed);
    let shuffled = rng::shuffled_indices(n, &mut cv_rng);
    let slices = fold_slices(n, folds);

    let points = grid_points(grid);
    let mut scored = Vec::with_capacity(points.len());
    let mut winner: Option<(HyperParams, f64)> = None;
    for point in points {
        let mut fold_accuracy = Vec::with_capacity(folds);
        for (f, &(lo, hi)) in slices.iter().enumerate() {
            let val_rows = &shuffled[lo..hi];
            let train_rows: Vec<usize> = shuffled[..lo]
                .iter()
                .chain(&shuffled[hi..])
                .copied()
                .collect();
            let train_x = features.select_rows(&train_rows);
            let train_y: Vec<f64> = train_rows.iter().map(|&i| labels[i]).collect();
            let val_x = features.select_rows(val_rows);
            let val_y: Vec<f64> = val_rows.iter().map(|&i| labels[i]).collect();
            let fit_seed = rng::derive_seed(seed, &["fold", &f.to_string()]);
            let model = fit_with(
                descriptor,
                &point,
                &train_x,
                &train_y,
                fit_seed,
                descriptor.requires_standardization,
            )?;
            let preds = predict(&model, &val_x)?;
            let correct = preds.iter().zip(&val_y).filter(|(p, y)| p == y).count();
            fold_accuracy.push(correct as f64 / val_y.len() as f64);
        }
        let mean_acc = fold_accuracy.iter().sum::<f64>() / folds as f64;
        scored.push((point.clone(), mean_acc));
        match &winner {
            Some((_, best)) if mean_acc <= *best => {}
            _ => winner = Some((point, mean_acc)),
        }
    }
    let (winner, _) = winner.expect("non-empty grid");
    let report = TuningReport {
        grid_points: scored,
        winner: winner.clone(),
        cv_seed: seed,
    };
    Ok((winner, report))
}
