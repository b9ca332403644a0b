//! Loss samples and aggregate performance scores computed from predictions.
//!
//! Pointwise losses produce one value per test point; aggregate scores
//! produce a single value per test set and are not expressible as a mean of
//! pointwise terms. Either kind can be assembled into a [`LossTensor`]
//! indexed by (dataset, strategy).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datastore::{Dataset, PredictionRecord, SplitSpec};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("prediction and label vectors differ in length ({predicted} vs {actual})")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("quantile parameter alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("binary score requires 0/1 labels, found {0}")]
    NonBinaryLabels(f64),
    #[error("missing (dataset, strategy) pairs: {0:?}")]
    MissingPair(Vec<(String, String)>),
}

/// Pointwise loss functions, one value per (prediction, observation) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PointwiseLoss {
    /// Misclassification indicator, 1 - 1[y == yhat].
    Mmce,
    /// Squared error (y - yhat)^2.
    Squared,
    /// Absolute error |y - yhat|.
    Absolute,
    /// Quantile loss alpha * m(yhat, y) + (1 - alpha) * m(y, yhat) with
    /// m(x, z) = min(x - z, 0). As printed this is non-positive; the
    /// `pinball_convention` flag negates it into the usual non-negative form.
    Quantile { alpha: f64, pinball_convention: bool },
}

impl fmt::Display for PointwiseLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointwiseLoss::Mmce => write!(f, "mmce"),
            PointwiseLoss::Squared => write!(f, "squared"),
            PointwiseLoss::Absolute => write!(f, "absolute"),
            PointwiseLoss::Quantile { alpha, .. } => write!(f, "q:{alpha}"),
        }
    }
}

/// Aggregate scores over a whole test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregateScore {
    Sensitivity,
    Specificity,
    Precision,
    F1,
    /// Root mean squared error. `paper_form` keeps the unnormalized 2-norm
    /// of the residual; the default divides by sqrt(M) so values are
    /// comparable across test sets of different sizes.
    Rmse { paper_form: bool },
}

impl fmt::Display for AggregateScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateScore::Sensitivity => write!(f, "sens"),
            AggregateScore::Specificity => write!(f, "spec"),
            AggregateScore::Precision => write!(f, "prec"),
            AggregateScore::F1 => write!(f, "f1"),
            AggregateScore::Rmse { .. } => write!(f, "rmse"),
        }
    }
}

/// Whether smaller or larger values of a quantifier indicate better
/// performance; drives rank computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

impl PointwiseLoss {
    pub fn direction(&self) -> Direction {
        match self {
            // The quantile loss as printed is non-positive with 0 perfect,
            // so larger values are better; the negated pinball form is an
            // ordinary loss.
            PointwiseLoss::Quantile {
                pinball_convention: false,
                ..
            } => Direction::HigherIsBetter,
            _ => Direction::LowerIsBetter,
        }
    }
}

impl AggregateScore {
    pub fn direction(&self) -> Direction {
        match self {
            AggregateScore::Rmse { .. } => Direction::LowerIsBetter,
            _ => Direction::HigherIsBetter,
        }
    }
}

/// Elementwise loss vector for a prediction/observation pair of vectors.
pub fn pointwise_loss(
    loss: PointwiseLoss,
    predicted: &[f64],
    actual: &[f64],
) -> Result<Vec<f64>, MetricError> {
    if predicted.len() != actual.len() {
        return Err(MetricError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if let PointwiseLoss::Quantile { alpha, .. } = loss {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(MetricError::InvalidAlpha(alpha));
        }
    }
    let vals = predicted
        .iter()
        .zip(actual)
        .map(|(&yhat, &y)| match loss {
            PointwiseLoss::Mmce => {
                if y == yhat {
                    0.0
                } else {
                    1.0
                }
            }
            PointwiseLoss::Squared => (y - yhat) * (y - yhat),
            PointwiseLoss::Absolute => (y - yhat).abs(),
            PointwiseLoss::Quantile {
                alpha,
                pinball_convention,
            } => {
                let m = |x: f64, z: f64| (x - z).min(0.0);
                let q = alpha * m(yhat, y) + (1.0 - alpha) * m(y, yhat);
                if pinball_convention {
                    -q
                } else {
                    q
                }
            }
        })
        .collect();
    Ok(vals)
}

/// Aggregate score over a full test set.
///
/// The four classification scores require 0/1 vectors with 1 as the positive
/// class. An undefined denominator (e.g. sensitivity with no positives)
/// yields a NaN sentinel rather than an error.
pub fn aggregate_score(
    score: AggregateScore,
    predicted: &[f64],
    actual: &[f64],
) -> Result<f64, MetricError> {
    if predicted.len() != actual.len() {
        return Err(MetricError::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    if let AggregateScore::Rmse { paper_form } = score {
        let ss: f64 = predicted
            .iter()
            .zip(actual)
            .map(|(&yhat, &y)| (y - yhat) * (y - yhat))
            .sum();
        return Ok(if paper_form {
            ss.sqrt()
        } else {
            (ss / predicted.len() as f64).sqrt()
        });
    }
    for &v in predicted.iter().chain(actual) {
        if v != 0.0 && v != 1.0 {
            return Err(MetricError::NonBinaryLabels(v));
        }
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let m = predicted.len() as f64;
    let sum_y: f64 = actual.iter().sum();
    let sum_yhat: f64 = predicted.iter().sum();
    let tp = dot(actual, predicted);
    let value = match score {
        AggregateScore::Sensitivity => ratio(tp, sum_y),
        AggregateScore::Specificity => {
            // <1-y, 1-yhat> = M - sum(y) - sum(yhat) + <y, yhat>
            ratio(m - sum_y - sum_yhat + tp, m - sum_y)
        }
        AggregateScore::Precision => ratio(tp, sum_yhat),
        AggregateScore::F1 => ratio(2.0 * tp, sum_yhat + sum_y),
        AggregateScore::Rmse { .. } => unreachable!(),
    };
    Ok(value)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}

/// Which quantifier a [`LossTensor`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LossKind {
    Average(PointwiseLoss),
    Aggregate(AggregateScore),
}

impl LossKind {
    pub fn direction(&self) -> Direction {
        match self {
            LossKind::Average(l) => l.direction(),
            LossKind::Aggregate(s) => s.direction(),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossKind::Average(l) => l.fmt(f),
            LossKind::Aggregate(s) => s.fmt(f),
        }
    }
}

pub type PairKey = (String, String);

/// Per-point loss samples and per-pair aggregates for every
/// (dataset, strategy) pair in an evaluation.
///
/// Kept in memory and exported as CSV (tuple-keyed maps have no JSON
/// form).
#[derive(Debug, Clone)]
pub struct LossTensor {
    pub kind: LossKind,
    /// (dataset_id, strategy_id) -> per-test-point losses. Empty for
    /// aggregate kinds.
    pub per_point: BTreeMap<PairKey, Vec<f64>>,
    /// (dataset_id, strategy_id) -> per-pair value. For average kinds this
    /// is the mean of the per-point vector.
    pub aggregate: BTreeMap<PairKey, f64>,
    pub dataset_ids: Vec<String>,
    pub strategy_ids: Vec<String>,
}

impl LossTensor {
    pub fn value(&self, dataset_id: &str, strategy_id: &str) -> Option<f64> {
        self.aggregate
            .get(&(dataset_id.to_string(), strategy_id.to_string()))
            .copied()
    }

    /// Per-dataset values for one strategy, in `dataset_ids` order, skipping
    /// missing pairs.
    pub fn strategy_column(&self, strategy_id: &str) -> Vec<(String, f64)> {
        self.dataset_ids
            .iter()
            .filter_map(|d| self.value(d, strategy_id).map(|v| (d.clone(), v)))
            .collect()
    }

    /// Datasets on which every strategy has a value.
    pub fn complete_datasets(&self) -> Vec<String> {
        self.dataset_ids
            .iter()
            .filter(|d| {
                self.strategy_ids
                    .iter()
                    .all(|s| self.aggregate.contains_key(&((*d).clone(), s.clone())))
            })
            .cloned()
            .collect()
    }
}

/// Assembles a [`LossTensor`] from prediction records.
///
/// Every (dataset, strategy) cross-product pair must be present in
/// `records`; absent pairs are reported in a `MissingPair` error.
pub fn build_loss_tensor(
    records: &BTreeMap<PairKey, PredictionRecord>,
    splits: &BTreeMap<String, SplitSpec>,
    datasets: &BTreeMap<String, Dataset>,
    strategy_ids: &[String],
    kind: LossKind,
) -> Result<LossTensor, MetricError> {
    let dataset_ids: Vec<String> = datasets.keys().cloned().collect();
    let mut missing = Vec::new();
    for d in &dataset_ids {
        for s in strategy_ids {
            if !records.contains_key(&(d.clone(), s.clone())) {
                missing.push((d.clone(), s.clone()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(MetricError::MissingPair(missing));
    }
    build_loss_tensor_partial(records, splits, datasets, strategy_ids, kind)
}

/// Like [`build_loss_tensor`], but assembles only the pairs present in
/// `records`, for evaluations where failed jobs were quarantined. Callers
/// are responsible for deciding which absences are legitimate.
pub fn build_loss_tensor_partial(
    records: &BTreeMap<PairKey, PredictionRecord>,
    splits: &BTreeMap<String, SplitSpec>,
    datasets: &BTreeMap<String, Dataset>,
    strategy_ids: &[String],
    kind: LossKind,
) -> Result<LossTensor, MetricError> {
    let dataset_ids: Vec<String> = datasets.keys().cloned().collect();
    let mut per_point = BTreeMap::new();
    let mut aggregate = BTreeMap::new();
    for d in &dataset_ids {
        let dataset = &datasets[d];
        let split = &splits[d];
        let actual: Vec<f64> = split
            .test_indices
            .iter()
            .map(|&i| dataset.labels[i])
            .collect();
        for s in strategy_ids {
            let key = (d.clone(), s.clone());
            let Some(record) = records.get(&key) else {
                continue;
            };
            match kind {
                LossKind::Average(loss) => {
                    let pts = pointwise_loss(loss, &record.predicted_labels, &actual)?;
                    let mean = pts.iter().sum::<f64>() / pts.len() as f64;
                    per_point.insert(key.clone(), pts);
                    aggregate.insert(key, mean);
                }
                LossKind::Aggregate(score) => {
                    let v = aggregate_score(score, &record.predicted_labels, &actual)?;
                    aggregate.insert(key, v);
                }
            }
        }
    }
    Ok(LossTensor {
        kind,
        per_point,
        aggregate,
        dataset_ids,
        strategy_ids: strategy_ids.to_vec(),
    })
}

/// Long-format CSV export: dataset_id, strategy_id, point_index, value.
/// Aggregate rows leave point_index empty.
pub fn loss_tensor_long_csv(tensor: &LossTensor) -> String {
    let mut out = String::from("dataset_id,strategy_id,point_index,value\n");
    for ((d, s), v) in &tensor.aggregate {
        out.push_str(&format!("{d},{s},,{v}\n"));
    }
    for ((d, s), pts) in &tensor.per_point {
        for (j, v) in pts.iter().enumerate() {
            out.push_str(&format!("{d},{s},{j},{v}\n"));
        }
    }
    out
}
