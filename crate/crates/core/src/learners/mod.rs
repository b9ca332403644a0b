//! Built-in prediction strategies with a uniform fit/predict contract.
//!
//! Each strategy carries metadata (family, supported tasks, default tuning
//! grid, whether it wants standardized features) in a [`StrategyDescriptor`]
//! so callers can look strategies up by id, task or family and tune them
//! without knowing their internals.
//!
//! The built-in set covers the strategy families that are specified down to
//! the update rule: a majority-class baseline, Gaussian and Bernoulli naive
//! Bayes, k-nearest neighbours with Minkowski distance, and a one-vs-rest
//! passive-aggressive linear classifier. Kernel methods, tree ensembles and
//! neural networks are out of scope.

mod baseline;
mod knn;
mod naive_bayes;
mod passive_aggressive;
mod standardize;
mod tuning;

pub use standardize::{standardize_apply, standardize_fit, FeatureStats};
pub use tuning::{tune, TuningReport};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

pub type HyperParams = BTreeMap<String, f64>;
pub type Grid = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("unknown strategy id {0}")]
    UnknownStrategyId(String),
    #[error("strategy {0} cannot be trained on a single class")]
    SingleClassTraining(String),
    #[error("model was fitted on {expected} features but received {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{n} training samples are too few for {folds} folds")]
    TooFewSamples { n: usize, folds: usize },
    #[error("empty training set")]
    EmptyTraining,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("tuning grid is empty")]
    EmptyGrid,
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Baseline,
    NaiveBayes,
    PrototypeMethod,
    LinearModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Classification,
    Regression,
}

/// Metadata attached to a registered strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDescriptor {
    pub id: String,
    pub family: Family,
    pub tasks: Vec<Task>,
    /// Hyper-parameter name -> candidate values, exhaustively searched by
    /// [`tune`]. Empty for strategies without tunable hyper-parameters.
    pub default_grid: Grid,
    pub requires_standardization: bool,
}

/// The built-in strategy registry.
pub fn registry() -> Vec<StrategyDescriptor> {
    let classification = vec![Task::Classification];
    vec![
        StrategyDescriptor {
            id: "Baseline".into(),
            family: Family::Baseline,
            tasks: classification.clone(),
            default_grid: Grid::new(),
            requires_standardization: false,
        },
        StrategyDescriptor {
            id: "GaussianNB".into(),
            family: Family::NaiveBayes,
            tasks: classification.clone(),
            default_grid: Grid::new(),
            requires_standardization: true,
        },
        StrategyDescriptor {
            id: "BernoulliNB".into(),
            family: Family::NaiveBayes,
            tasks: classification.clone(),
            default_grid: Grid::new(),
            requires_standardization: true,
        },
        StrategyDescriptor {
            id: "KNN".into(),
            family: Family::PrototypeMethod,
            tasks: classification.clone(),
            default_grid: Grid::from([
                ("n_neighbors".to_string(), (1..=30).map(f64::from).collect()),
                ("p".to_string(), vec![1.0, 2.0]),
            ]),
            requires_standardization: true,
        },
        StrategyDescriptor {
            id: "PassiveAggressive".into(),
            family: Family::LinearModel,
            tasks: classification,
            default_grid: Grid::from([(
                "C".to_string(),
                (-2..=10).map(|e| 10f64.powi(e)).collect(),
            )]),
            requires_standardization: true,
        },
    ]
}

/// Filter for [`registry_lookup`]; empty filter matches everything.
#[derive(Debug, Clone, Default)]
pub struct RegistryFilter {
    pub task: Option<Task>,
    pub family: Option<Family>,
    pub ids: Option<Vec<String>>,
}

/// Descriptors matching all provided filter fields.
pub fn registry_lookup(filter: &RegistryFilter) -> Result<Vec<StrategyDescriptor>, LearnError> {
    let all = registry();
    if let Some(ids) = &filter.ids {
        for id in ids {
            if !all.iter().any(|d| &d.id == id) {
                return Err(LearnError::UnknownStrategyId(id.clone()));
            }
        }
    }
    Ok(all
        .into_iter()
        .filter(|d| filter.task.is_none_or(|t| d.tasks.contains(&t)))
        .filter(|d| filter.family.is_none_or(|f| d.family == f))
        .filter(|d| {
            filter
                .ids
                .as_ref()
                .is_none_or(|ids| ids.iter().any(|id| id == &d.id))
        })
        .collect())
}

pub fn descriptor(id: &str) -> Result<StrategyDescriptor, LearnError> {
    registry()
        .into_iter()
        .find(|d| d.id == id)
        .ok_or_else(|| LearnError::UnknownStrategyId(id.to_string()))
}

/// Strategy-specific fitted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum ModelParams {
    Baseline(baseline::BaselineParams),
    GaussianNb(naive_bayes::GaussianNbParams),
    BernoulliNb(naive_bayes::BernoulliNbParams),
    Knn(knn::KnnParams),
    PassiveAggressive(passive_aggressive::PaParams),
}

/// A trained strategy together with the preprocessing state it was fitted
/// with. Predicts only on feature matrices of the fit-time dimensionality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub strategy_id: String,
    pub chosen_hyperparameters: HyperParams,
    /// Per-feature standardization stats applied at predict time, when the
    /// strategy requested standardization at fit time.
    pub standardization_stats: Option<Vec<FeatureStats>>,
    pub n_features: usize,
    pub(crate) params: ModelParams,
}

/// Fits a strategy, standardizing features first when the descriptor asks
/// for it. Deterministic given identical inputs and seed.
pub fn fit(
    descriptor: &StrategyDescriptor,
    hyperparameters: &HyperParams,
    features: &Matrix,
    labels: &[f64],
    seed: u64,
) -> Result<FittedModel, LearnError> {
    fit_with(
        descriptor,
        hyperparameters,
        features,
        labels,
        seed,
        descriptor.requires_standardization,
    )
}

/// [`fit`] with explicit control over fit-time standardization; used when
/// features were already standardized collection-wide.
pub fn fit_with(
    descriptor: &StrategyDescriptor,
    hyperparameters: &HyperParams,
    features: &Matrix,
    labels: &[f64],
    seed: u64,
    standardize: bool,
) -> Result<FittedModel, LearnError> {
    if labels.is_empty() || features.n_rows() == 0 {
        return Err(LearnError::EmptyTraining);
    }
    assert_eq!(features.n_rows(), labels.len(), "features/labels aligned");
    let (stats, x) = if standardize {
        let stats = standardize_fit(features);
        let x = standardize_apply(&stats, features);
        (Some(stats), x)
    } else {
        (None, features.clone())
    };
    let params = match descriptor.id.as_str() {
        "Baseline" => {
            require_keys(hyperparameters, &[])?;
            ModelParams::Baseline(baseline::fit(labels))
        }
        "GaussianNB" => {
            require_keys(hyperparameters, &[])?;
            ModelParams::GaussianNb(naive_bayes::fit_gaussian(&x, labels))
        }
        "BernoulliNB" => {
            require_keys(hyperparameters, &[])?;
            ModelParams::BernoulliNb(naive_bayes::fit_bernoulli(&x, labels))
        }
        "KNN" => {
            require_keys(hyperparameters, &["n_neighbors", "p"])?;
            let k = int_param(hyperparameters, "n_neighbors", 5.0)?;
            let p = int_param(hyperparameters, "p", 2.0)?;
            if k < 1 {
                return Err(LearnError::InvalidHyperparameter(format!(
                    "n_neighbors must be >= 1, got {k}"
                )));
            }
            if p != 1 && p != 2 {
                return Err(LearnError::InvalidHyperparameter(format!(
                    "p must be 1 or 2, got {p}"
                )));
            }
            ModelParams::Knn(knn::fit(&x, labels, k as usize, p as u8))
        }
        "PassiveAggressive" => {
            require_keys(hyperparameters, &["C"])?;
            let c = *hyperparameters.get("C").unwrap_or(&1.0);
            if c.is_nan() || c <= 0.0 {
                return Err(LearnError::InvalidHyperparameter(format!(
                    "C must be positive, got {c}"
                )));
            }
            ModelParams::PassiveAggressive(passive_aggressive::fit(&x, labels, c, seed)?)
        }
        other => return Err(LearnError::UnknownStrategyId(other.to_string())),
    };
    Ok(FittedModel {
        strategy_id: descriptor.id.clone(),
        chosen_hyperparameters: hyperparameters.clone(),
        standardization_stats: stats,
        n_features: features.n_cols(),
        params,
    })
}

fn require_keys(hyper: &HyperParams, allowed: &[&str]) -> Result<(), LearnError> {
    for key in hyper.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(LearnError::InvalidHyperparameter(format!(
                "unknown hyperparameter {key}"
            )));
        }
    }
    Ok(())
}

fn int_param(hyper: &HyperParams, key: &str, default: f64) -> Result<i64, LearnError> {
    let v = *hyper.get(key).unwrap_or(&default);
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(LearnError::InvalidHyperparameter(format!(
            "{key} must be an integer, got {v}"
        )));
    }
    Ok(v as i64)
}

/// One predicted label per feature row; a pure function of (model, features).
pub fn predict(model: &FittedModel, features: &Matrix) -> Result<Vec<f64>, LearnError> {
    if features.n_cols() != model.n_features {
        return Err(LearnError::DimensionMismatch {
            expected: model.n_features,
            got: features.n_cols(),
        });
    }
    let x = match &model.standardization_stats {
        Some(stats) => standardize_apply(stats, features),
        None => features.clone(),
    };
    let preds = match &model.params {
        ModelParams::Baseline(p) => baseline::predict(p, &x),
        ModelParams::GaussianNb(p) => naive_bayes::predict_gaussian(p, &x),
        ModelParams::BernoulliNb(p) => naive_bayes::predict_bernoulli(p, &x),
        ModelParams::Knn(p) => knn::predict(p, &x),
        ModelParams::PassiveAggressive(p) => passive_aggressive::predict(p, &x),
    };
    Ok(preds)
}

/// Distinct class labels in ascending order.
pub(crate) fn class_values(labels: &[f64]) -> Vec<f64> {
    let mut classes: Vec<f64> = Vec::new();
    for &l in labels {
        if !classes.contains(&l) {
            classes.push(l);
        }
    }
    classes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    classes
}

/// Index of the maximum score, breaking ties toward the smaller index
/// (classes are kept in ascending order, so ties go to the smaller class).
pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_five_classifiers() {
        let all = registry_lookup(&RegistryFilter {
            task: Some(Task::Classification),
            ..Default::default()
        })
        .unwrap();
        let ids: Vec<&str> = all.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(
            ids,
            vec![
                "Baseline",
                "GaussianNB",
                "BernoulliNB",
                "KNN",
                "PassiveAggressive"
            ]
        );
    }

    #[test]
    fn registry_lookup_by_id() {
        let found = registry_lookup(&RegistryFilter {
            ids: Some(vec!["KNN".into()]),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].id, "KNN");
        assert_eq!(found[0].default_grid["n_neighbors"].len(), 30);
        assert_eq!(found[0].default_grid["p"], vec![1.0, 2.0]);
    }

    #[test]
    fn registry_rejects_unknown_id() {
        let err = registry_lookup(&RegistryFilter {
            ids: Some(vec!["RandomForest".into()]),
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err, LearnError::UnknownStrategyId("RandomForest".into()));
    }

    #[test]
    fn pa_grid_is_thirteen_log_spaced() {
        let d = descriptor("PassiveAggressive").unwrap();
        let c = &d.default_grid["C"];
        assert_eq!(c.len(), 13);
        assert_eq!(c[0], 1e-2);
        assert_eq!(c[12], 1e10);
        for w in c.windows(2) {
            assert!((w[1] / w[0] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_rejects_unknown_hyperparameter() {
        let d = descriptor("Baseline").unwrap();
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let mut h = HyperParams::new();
        h.insert("depth".into(), 3.0);
        assert!(matches!(
            fit(&d, &h, &x, &[0.0, 1.0], 0),
            Err(LearnError::InvalidHyperparameter(_))
        ));
    }

    #[test]
    fn predict_checks_dimensionality() {
        let d = descriptor("GaussianNB").unwrap();
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let model = fit(&d, &HyperParams::new(), &x, &[0.0, 1.0], 0).unwrap();
        let bad = Matrix::from_rows(&[vec![0.0, 1.0, 2.0]]);
        assert_eq!(
            predict(&model, &bad),
            Err(LearnError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
    }

    #[test]
    fn class_values_sorted_unique() {
        assert_eq!(class_values(&[2.0, 0.0, 1.0, 0.0, 2.0]), vec![0.0, 1.0, 2.0]);
    }
}
