//! Expected-loss and rank estimators with standard errors and
//! normal-approximation confidence intervals.
//!
//! Three future-data scenarios are distinguished: re-using a trained model
//! on a seen source (per dataset, and averaged over seen sources) and
//! re-training on an unseen source. The scenario determines both the
//! standard-error formula and the quantity governing the CLT asymptotics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::metrics::Direction;
use crate::special::{self, SpecialFnError};

#[derive(Debug, Error, PartialEq)]
pub enum EstimationError {
    #[error("need at least 2 loss samples to estimate a standard error, got {0}")]
    TooFewPoints(usize),
    #[error("need at least {need} datasets, got {got}")]
    TooFewDatasets { need: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("missing entry in loss matrix at row {row}, column {col}")]
    MissingEntry { row: usize, col: usize },
    #[error("confidence must lie in (0, 1), got {0}")]
    InvalidConfidence(f64),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

/// Future-data scenario an estimate gives a guarantee for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Re-used trained model, seen data source (single dataset).
    A1ReusedSeen,
    /// Re-used trained models, averaged over the seen data sources.
    A2ReusedSeenAveraged,
    /// Re-trained on an unseen data source.
    CRetrainedUnseen,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::A1ReusedSeen => "a1",
            Scenario::A2ReusedSeenAveraged => "a2",
            Scenario::CRetrainedUnseen => "c",
        }
    }
}

/// Sample sizes governing the central-limit asymptotics of an estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NBasis {
    /// Number of test points in one dataset.
    TestPoints(usize),
    /// Dataset count together with every per-dataset test size.
    PooledTestPoints {
        datasets: usize,
        per_dataset: Vec<usize>,
    },
    /// Number of datasets.
    Datasets(usize),
}

/// Point estimate with standard error and a two-sided normal CI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCi {
    pub point: f64,
    pub std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence: f64,
    pub scenario: Scenario,
    pub n_basis: NBasis,
}

fn make_ci(
    point: f64,
    std_error: f64,
    confidence: f64,
    scenario: Scenario,
    n_basis: NBasis,
) -> Result<EstimateWithCi, EstimationError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(EstimationError::InvalidConfidence(confidence));
    }
    let alpha = 1.0 - confidence;
    let z = special::normal_quantile(alpha / 2.0)?; // negative
    Ok(EstimateWithCi {
        point,
        std_error,
        ci_lower: point + z * std_error,
        ci_upper: point - z * std_error,
        confidence,
        scenario,
        n_basis,
    })
}

fn all_equal(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Constant input yields its value exactly (a float sum of n equal values
/// need not divide back to the value, and the zero-variance contracts below
/// are exact).
fn mean(values: &[f64]) -> f64 {
    if all_equal(values) {
        values[0]
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Unbiased sample variance (n - 1 denominator); exactly 0 for constant
/// input.
fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if all_equal(values) {
        return 0.0;
    }
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
}

/// Expected loss on one dataset when re-using the trained model: sample mean
/// of the per-point losses with SE sqrt(v / M).
pub fn eta_hat_per_dataset(
    per_point_losses: &[f64],
    confidence: f64,
) -> Result<EstimateWithCi, EstimationError> {
    let m = per_point_losses.len();
    if m < 2 {
        return Err(EstimationError::TooFewPoints(m));
    }
    let point = mean(per_point_losses);
    let v = sample_variance(per_point_losses, point);
    let se = (v / m as f64).sqrt();
    make_ci(
        point,
        se,
        confidence,
        Scenario::A1ReusedSeen,
        NBasis::TestPoints(m),
    )
}

/// Per-dataset inputs to the pooled estimator: point estimate, sample
/// variance of the per-point losses, and test size.
#[derive(Debug, Clone, Copy)]
pub struct PerDatasetEstimate {
    pub eta_hat: f64,
    pub v_hat: f64,
    pub m: usize,
}

/// Expected loss averaged over the seen data sources: mean of the
/// per-dataset estimates with SE (1/D) sqrt(sum v_i / M_i).
pub fn eta_hat_pooled(
    per_dataset: &[PerDatasetEstimate],
    confidence: f64,
) -> Result<EstimateWithCi, EstimationError> {
    if per_dataset.is_empty() {
        return Err(EstimationError::EmptyInput);
    }
    for e in per_dataset {
        if e.m < 2 {
            return Err(EstimationError::TooFewPoints(e.m));
        }
    }
    let d = per_dataset.len() as f64;
    let point = per_dataset.iter().map(|e| e.eta_hat).sum::<f64>() / d;
    let var_sum: f64 = per_dataset.iter().map(|e| e.v_hat / e.m as f64).sum();
    let se = var_sum.sqrt() / d;
    make_ci(
        point,
        se,
        confidence,
        Scenario::A2ReusedSeenAveraged,
        NBasis::PooledTestPoints {
            datasets: per_dataset.len(),
            per_dataset: per_dataset.iter().map(|e| e.m).collect(),
        },
    )
}

/// Expected loss on an unseen data source: mean over datasets with the
/// between-dataset sample standard deviation over sqrt(D) as SE.
///
/// Accepts either per-dataset mean losses (average quantifiers) or
/// per-dataset aggregate scores.
pub fn epsilon_star(
    per_dataset_values: &[f64],
    confidence: f64,
) -> Result<EstimateWithCi, EstimationError> {
    let d = per_dataset_values.len();
    if d < 2 {
        return Err(EstimationError::TooFewDatasets { need: 2, got: d });
    }
    let point = mean(per_dataset_values);
    let w = sample_variance(per_dataset_values, point);
    let se = (w / d as f64).sqrt();
    make_ci(
        point,
        se,
        confidence,
        Scenario::CRetrainedUnseen,
        NBasis::Datasets(d),
    )
}

/// Within-dataset performance ranks and their averages over datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    /// D x K matrix of ranks; within each row the best strategy has rank 1
    /// and ties receive the average of the ranks they span.
    pub rank_matrix: Matrix,
    /// Average rank per strategy; empty until [`average_ranks`] fills it.
    pub avg_ranks: Vec<f64>,
    /// Standard errors of the average ranks; empty until [`average_ranks`].
    pub avg_rank_se: Vec<f64>,
    pub n_datasets: usize,
    pub n_strategies: usize,
}

/// Ranks each row of a D x K performance matrix.
pub fn rank_matrix(
    performances: &Matrix,
    direction: Direction,
) -> Result<RankSummary, EstimationError> {
    let (d, k) = (performances.n_rows(), performances.n_cols());
    if d == 0 || k == 0 {
        return Err(EstimationError::EmptyInput);
    }
    for i in 0..d {
        for j in 0..k {
            if performances.get(i, j).is_nan() {
                return Err(EstimationError::MissingEntry { row: i, col: j });
            }
        }
    }
    let mut ranks = Matrix::zeros(d, k);
    for i in 0..d {
        let row = performances.row(i);
        for r in rank_row(row, direction) {
            ranks.set(i, r.0, r.1);
        }
    }
    Ok(RankSummary {
        rank_matrix: ranks,
        avg_ranks: Vec::new(),
        avg_rank_se: Vec::new(),
        n_datasets: d,
        n_strategies: k,
    })
}

/// Ranks one row, averaging over ties. Returns (column, rank) pairs.
fn rank_row(values: &[f64], direction: Direction) -> Vec<(usize, f64)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = values[a].partial_cmp(&values[b]).unwrap();
        match direction {
            Direction::LowerIsBetter => cmp,
            Direction::HigherIsBetter => cmp.reverse(),
        }
        .then(a.cmp(&b))
    });
    let mut out = Vec::with_capacity(values.len());
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && values[order[end]] == values[order[pos]] {
            end += 1;
        }
        // Ranks pos+1 ..= end averaged over the tie group.
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &col in &order[pos..end] {
            out.push((col, avg));
        }
        pos = end;
    }
    out
}

/// Fills average ranks and their standard errors sqrt(nu / D), where nu is
/// the between-dataset sample variance of the ranks.
pub fn average_ranks(summary: &RankSummary) -> Result<RankSummary, EstimationError> {
    let d = summary.n_datasets;
    if d < 2 {
        return Err(EstimationError::TooFewDatasets { need: 2, got: d });
    }
    let k = summary.n_strategies;
    let mut avg = Vec::with_capacity(k);
    let mut se = Vec::with_capacity(k);
    for j in 0..k {
        let col = summary.rank_matrix.column(j);
        let r_bar = mean(&col);
        let nu = sample_variance(&col, r_bar);
        avg.push(r_bar);
        se.push((nu / d as f64).sqrt());
    }
    Ok(RankSummary {
        rank_matrix: summary.rank_matrix.clone(),
        avg_ranks: avg,
        avg_rank_se: se,
        n_datasets: d,
        n_strategies: k,
    })
}

/// Critical average-rank difference for the post-hoc comparison of K
/// strategies over D datasets: q_alpha(K) * sqrt(K (K + 1) / (6 D)).
pub fn nemenyi_cd(k: usize, d: usize, alpha: f64) -> Result<f64, EstimationError> {
    if d < 2 {
        return Err(EstimationError::TooFewDatasets { need: 2, got: d });
    }
    let q = special::studentized_range_q(alpha, k)?;
    Ok(q * ((k * (k + 1)) as f64 / (6.0 * d as f64)).sqrt())
}
