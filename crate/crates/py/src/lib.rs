//! Python bindings: synthetic collections, benchmark runs, loss and score
//! computation, estimators with confidence intervals, comparison tests and
//! critical-difference utilities.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use benchkit::comparison::{self, Alternative, Correction};
use benchkit::datastore::Collection;
use benchkit::estimation;
use benchkit::learners;
use benchkit::metrics::{self, Direction, LossKind, PointwiseLoss};
use benchkit::orchestrator::{self, RunConfig, SynthSpec};
use benchkit::report::{self, EvalContext};
use benchkit::special;
use benchkit::Matrix;

/// (rank matrix rows, average ranks, standard errors).
type RankTriple = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_alternative(s: &str) -> PyResult<Alternative> {
    match s {
        "two" | "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
        "less" => Ok(Alternative::Less),
        "greater" => Ok(Alternative::Greater),
        other => Err(value_err(format!("unknown alternative {other}"))),
    }
}

fn parse_direction(lower_is_better: bool) -> Direction {
    if lower_is_better {
        Direction::LowerIsBetter
    } else {
        Direction::HigherIsBetter
    }
}

fn matrix_from(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    if rows.is_empty() {
        return Err(value_err("matrix needs at least one row"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(value_err("matrix rows must all have the same length"));
    }
    Ok(Matrix::from_rows(rows))
}

/// Point estimate with standard error and confidence interval.
#[pyclass(get_all, frozen)]
pub struct Estimate {
    point: f64,
    std_error: f64,
    ci_lower: f64,
    ci_upper: f64,
    confidence: f64,
    scenario: String,
}

impl From<estimation::EstimateWithCi> for Estimate {
    fn from(e: estimation::EstimateWithCi) -> Self {
        Estimate {
            point: e.point,
            std_error: e.std_error,
            ci_lower: e.ci_lower,
            ci_upper: e.ci_upper,
            confidence: e.confidence,
            scenario: e.scenario.label().to_string(),
        }
    }
}

#[pymethods]
impl Estimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(point={}, std_error={}, ci=({}, {}), scenario={})",
            self.point, self.std_error, self.ci_lower, self.ci_upper, self.scenario
        )
    }
}

/// Hypothesis-test outcome with effect sizes.
#[pyclass(get_all, frozen)]
pub struct TestOutcome {
    test: String,
    statistic: f64,
    p_value: f64,
    effect_raw: f64,
    effect_normalized: f64,
    method: String,
    n_used: usize,
    degenerate: bool,
}

impl From<comparison::TestResult> for TestOutcome {
    fn from(r: comparison::TestResult) -> Self {
        TestOutcome {
            test: format!("{:?}", r.test),
            statistic: r.statistic,
            p_value: r.p_value,
            effect_raw: r.effect_raw,
            effect_normalized: r.effect_normalized,
            method: format!("{:?}", r.method_detail),
            n_used: r.n_used,
            degenerate: r.degenerate,
        }
    }
}

#[pymethods]
impl TestOutcome {
    fn __repr__(&self) -> String {
        format!(
            "TestOutcome(test={}, statistic={}, p_value={})",
            self.test, self.statistic, self.p_value
        )
    }
}

/// Generate a synthetic two-class collection of Gaussian-blob datasets.
#[pyfunction]
#[pyo3(signature = (collection, n_datasets=5, n_per_dataset=500, n_features=2, class_separation=3.0, seed=0))]
fn synth_collection(
    collection: PathBuf,
    n_datasets: usize,
    n_per_dataset: usize,
    n_features: usize,
    class_separation: f64,
    seed: u64,
) -> PyResult<()> {
    let spec = SynthSpec {
        n_datasets,
        n_per_dataset,
        n_features,
        class_separation,
        seed,
    };
    orchestrator::synth_collection(&spec, &collection).map_err(runtime_err)?;
    Ok(())
}

/// Run the benchmark over every (dataset, strategy) pair, resuming from the
/// checkpoint. Returns (completed, skipped, failed) counts.
#[pyfunction]
#[pyo3(signature = (collection, strategies=None, ratio=2.0/3.0, seed=0, parallelism=1, paper_standardize=false))]
fn run_benchmark(
    collection: PathBuf,
    strategies: Option<Vec<String>>,
    ratio: f64,
    seed: u64,
    parallelism: usize,
    paper_standardize: bool,
) -> PyResult<(usize, usize, usize)> {
    let strategy_ids = strategies
        .unwrap_or_else(|| learners::registry().into_iter().map(|d| d.id).collect());
    let config = RunConfig {
        collection_dir: collection,
        strategy_ids,
        split_ratio: ratio,
        master_seed: seed,
        parallelism,
        paper_standardize,
        grid_overrides: BTreeMap::new(),
        cv_folds: 5,
        job_limit: None,
    };
    let summary = orchestrator::run(&config).map_err(runtime_err)?;
    Ok((summary.completed, summary.skipped, summary.failed.len()))
}

/// Registered strategy ids.
#[pyfunction]
fn strategy_ids() -> Vec<String> {
    learners::registry().into_iter().map(|d| d.id).collect()
}

/// Per-dataset accuracy table: {strategy_id: {dataset_id: accuracy}}.
#[pyfunction]
#[pyo3(signature = (collection, strategies=None))]
fn accuracy_table(
    collection: PathBuf,
    strategies: Option<Vec<String>>,
) -> PyResult<BTreeMap<String, BTreeMap<String, f64>>> {
    let strategy_ids = strategies
        .unwrap_or_else(|| learners::registry().into_iter().map(|d| d.id).collect());
    let collection = Collection::open(collection).map_err(runtime_err)?;
    let context = EvalContext::load(&collection, &strategy_ids).map_err(runtime_err)?;
    let accuracy = context.accuracy().map_err(runtime_err)?;
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for ((dataset, strategy), value) in accuracy {
        out.entry(strategy).or_default().insert(dataset, value);
    }
    Ok(out)
}

/// Elementwise loss values; loss is one of "mmce", "squared", "absolute"
/// or "q:ALPHA".
#[pyfunction]
#[pyo3(signature = (loss, predicted, actual, pinball_convention=false))]
fn pointwise_loss(
    loss: &str,
    predicted: Vec<f64>,
    actual: Vec<f64>,
    pinball_convention: bool,
) -> PyResult<Vec<f64>> {
    let kind = match loss {
        "mmce" => PointwiseLoss::Mmce,
        "squared" => PointwiseLoss::Squared,
        "absolute" => PointwiseLoss::Absolute,
        other => match other.strip_prefix("q:") {
            Some(alpha) => PointwiseLoss::Quantile {
                alpha: alpha.parse().map_err(value_err)?,
                pinball_convention,
            },
            None => return Err(value_err(format!("unknown loss {other}"))),
        },
    };
    metrics::pointwise_loss(kind, &predicted, &actual).map_err(value_err)
}

/// Aggregate score over a test set; score is one of "sens", "spec",
/// "prec", "f1" or "rmse".
#[pyfunction]
#[pyo3(signature = (score, predicted, actual, paper_rmse=false))]
fn aggregate_score(
    score: &str,
    predicted: Vec<f64>,
    actual: Vec<f64>,
    paper_rmse: bool,
) -> PyResult<f64> {
    use benchkit::metrics::AggregateScore;
    let kind = match score {
        "sens" => AggregateScore::Sensitivity,
        "spec" => AggregateScore::Specificity,
        "prec" => AggregateScore::Precision,
        "f1" => AggregateScore::F1,
        "rmse" => AggregateScore::Rmse {
            paper_form: paper_rmse,
        },
        other => return Err(value_err(format!("unknown score {other}"))),
    };
    metrics::aggregate_score(kind, &predicted, &actual).map_err(value_err)
}

/// Mean loss on one dataset with a seen-source confidence interval.
#[pyfunction]
#[pyo3(signature = (losses, confidence=0.95))]
fn eta_hat(losses: Vec<f64>, confidence: f64) -> PyResult<Estimate> {
    estimation::eta_hat_per_dataset(&losses, confidence)
        .map(Estimate::from)
        .map_err(value_err)
}

/// Mean over per-dataset values with an unseen-source confidence interval.
#[pyfunction]
#[pyo3(signature = (per_dataset_values, confidence=0.95))]
fn epsilon_star(per_dataset_values: Vec<f64>, confidence: f64) -> PyResult<Estimate> {
    estimation::epsilon_star(&per_dataset_values, confidence)
        .map(Estimate::from)
        .map_err(value_err)
}

/// Within-row ranks and their averages: returns (rank_matrix, avg_ranks,
/// std_errors).
#[pyfunction]
#[pyo3(signature = (performances, lower_is_better=true))]
fn average_ranks(
    performances: Vec<Vec<f64>>,
    lower_is_better: bool,
) -> PyResult<RankTriple> {
    let matrix = matrix_from(&performances)?;
    let ranks = estimation::rank_matrix(&matrix, parse_direction(lower_is_better))
        .map_err(value_err)?;
    let summary = estimation::average_ranks(&ranks).map_err(value_err)?;
    let rows = (0..summary.rank_matrix.n_rows())
        .map(|i| summary.rank_matrix.row(i).to_vec())
        .collect();
    Ok((rows, summary.avg_ranks, summary.avg_rank_se))
}

/// Nemenyi critical average-rank difference.
#[pyfunction]
#[pyo3(signature = (k, d, alpha=0.05))]
fn nemenyi_cd(k: usize, d: usize, alpha: f64) -> PyResult<f64> {
    estimation::nemenyi_cd(k, d, alpha).map_err(value_err)
}

/// Paired t-test on per-dataset differences.
#[pyfunction]
#[pyo3(signature = (deltas, alternative="two"))]
fn paired_t_test(deltas: Vec<f64>, alternative: &str) -> PyResult<TestOutcome> {
    comparison::paired_t_test(&deltas, parse_alternative(alternative)?)
        .map(TestOutcome::from)
        .map_err(value_err)
}

/// Wilcoxon signed-rank test on per-dataset differences.
#[pyfunction]
#[pyo3(signature = (deltas, alternative="two"))]
fn wilcoxon_signed_rank(deltas: Vec<f64>, alternative: &str) -> PyResult<TestOutcome> {
    comparison::wilcoxon_signed_rank(&deltas, parse_alternative(alternative)?)
        .map(TestOutcome::from)
        .map_err(value_err)
}

/// Sign test on paired per-dataset performances.
#[pyfunction]
#[pyo3(signature = (perf_k, perf_k_prime, lower_is_better=true, alternative="two"))]
fn sign_test(
    perf_k: Vec<f64>,
    perf_k_prime: Vec<f64>,
    lower_is_better: bool,
    alternative: &str,
) -> PyResult<TestOutcome> {
    if perf_k.len() != perf_k_prime.len() {
        return Err(value_err("paired inputs must have equal length"));
    }
    comparison::sign_test(
        &perf_k,
        &perf_k_prime,
        parse_direction(lower_is_better),
        parse_alternative(alternative)?,
    )
    .map(TestOutcome::from)
    .map_err(value_err)
}

/// Friedman test on a D x K performance matrix (ranked within rows).
#[pyfunction]
#[pyo3(signature = (performances, lower_is_better=true))]
fn friedman_test(performances: Vec<Vec<f64>>, lower_is_better: bool) -> PyResult<TestOutcome> {
    let matrix = matrix_from(&performances)?;
    let ranks = estimation::rank_matrix(&matrix, parse_direction(lower_is_better))
        .map_err(value_err)?;
    comparison::friedman_test(&ranks.rank_matrix)
        .map(TestOutcome::from)
        .map_err(value_err)
}

/// Bonferroni or Holm adjustment of a p-value family.
#[pyfunction]
#[pyo3(signature = (p_values, method="holm"))]
fn correct_pvalues(p_values: Vec<f64>, method: &str) -> PyResult<Vec<f64>> {
    let method = match method {
        "none" => Correction::None,
        "bonferroni" => Correction::Bonferroni,
        "holm" => Correction::Holm,
        other => return Err(value_err(format!("unknown correction {other}"))),
    };
    Ok(comparison::correct_pvalues(&p_values, method))
}

/// Standard normal quantile.
#[pyfunction]
fn normal_quantile(p: f64) -> PyResult<f64> {
    special::normal_quantile(p).map_err(value_err)
}

/// Student-t survival probability P(T > t).
#[pyfunction]
fn t_survival(t: f64, df: usize) -> PyResult<f64> {
    special::t_survival(t, df).map_err(value_err)
}

/// Critical-difference diagram as an SVG string.
#[pyfunction]
fn cd_diagram_svg(avg_ranks: Vec<f64>, cd: f64, labels: Vec<String>) -> PyResult<String> {
    if avg_ranks.len() < 2 || avg_ranks.len() != labels.len() || cd <= 0.0 {
        return Err(value_err(
            "need >= 2 ranks, matching labels and a positive cd",
        ));
    }
    Ok(report::cd_diagram(&avg_ranks, cd, &labels))
}

/// Write the full report set for a collection; returns the output paths.
#[pyfunction]
#[pyo3(signature = (collection, strategies=None, out_dir=None))]
fn export_reports(
    collection: PathBuf,
    strategies: Option<Vec<String>>,
    out_dir: Option<PathBuf>,
) -> PyResult<Vec<String>> {
    let strategy_ids = strategies
        .unwrap_or_else(|| learners::registry().into_iter().map(|d| d.id).collect());
    let collection = Collection::open(&collection).map_err(runtime_err)?;
    let context = EvalContext::load(&collection, &strategy_ids).map_err(runtime_err)?;
    let out = out_dir.unwrap_or_else(|| collection.root().join("reports"));
    let manifest = report::export_all(&context, &report::ExportOptions::default(), &out)
        .map_err(runtime_err)?;
    Ok(manifest
        .files
        .iter()
        .map(|f| out.join(&f.name).to_string_lossy().into_owned())
        .collect())
}

/// Mean misclassification tensor as {strategy_id: {dataset_id: loss}}.
#[pyfunction]
#[pyo3(signature = (collection, strategies=None))]
fn mmce_table(
    collection: PathBuf,
    strategies: Option<Vec<String>>,
) -> PyResult<BTreeMap<String, BTreeMap<String, f64>>> {
    let strategy_ids = strategies
        .unwrap_or_else(|| learners::registry().into_iter().map(|d| d.id).collect());
    let collection = Collection::open(collection).map_err(runtime_err)?;
    let context = EvalContext::load(&collection, &strategy_ids).map_err(runtime_err)?;
    let tensor = context
        .tensor(LossKind::Average(PointwiseLoss::Mmce))
        .map_err(runtime_err)?;
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for ((dataset, strategy), value) in tensor.aggregate {
        out.entry(strategy).or_default().insert(dataset, value);
    }
    Ok(out)
}

#[pymodule]
fn benchkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Estimate>()?;
    m.add_class::<TestOutcome>()?;
    m.add_function(wrap_pyfunction!(synth_collection, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(strategy_ids, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy_table, m)?)?;
    m.add_function(wrap_pyfunction!(mmce_table, m)?)?;
    m.add_function(wrap_pyfunction!(pointwise_loss, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_score, m)?)?;
    m.add_function(wrap_pyfunction!(eta_hat, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_star, m)?)?;
    m.add_function(wrap_pyfunction!(average_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(nemenyi_cd, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_signed_rank, m)?)?;
    m.add_function(wrap_pyfunction!(sign_test, m)?)?;
    m.add_function(wrap_pyfunction!(friedman_test, m)?)?;
    m.add_function(wrap_pyfunction!(correct_pvalues, m)?)?;
    m.add_function(wrap_pyfunction!(normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(t_survival, m)?)?;
    m.add_function(wrap_pyfunction!(cd_diagram_svg, m)?)?;
    m.add_function(wrap_pyfunction!(export_reports, m)?)?;
    Ok(())
}
