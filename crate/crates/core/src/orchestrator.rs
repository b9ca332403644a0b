//! Benchmark execution: every (dataset, strategy) pair is tuned, fitted,
//! timed and evaluated on its held-out test rows, with a checkpoint after
//! each completed pair so an interrupted run resumes without recomputation.
//!
//! Per-job seeds are derived from (master seed, dataset id, strategy id),
//! never from a shared sequential stream, so results are identical whatever
//! the execution order or degree of parallelism.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datastore::{
    Collection, CompletedPair, DataError, Dataset, FailedPair, PredictionRecord, RunState,
    SplitSpec, FORMAT_VERSION,
};
use crate::learners::{
    self, standardize_apply, standardize_fit, Grid, HyperParams, LearnError, StrategyDescriptor,
    TuningReport,
};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("collection has no datasets")]
    NoDatasets,
    #[error("no strategies selected")]
    NoStrategies,
    #[error("cannot resume: {0}")]
    ResumeRejected(DataError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Full description of a benchmark run. Together with the collection
/// contents this determines every output byte except measured wall times.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub collection_dir: PathBuf,
    pub strategy_ids: Vec<String>,
    pub split_ratio: f64,
    pub master_seed: u64,
    pub parallelism: usize,
    /// Standardize each dataset once, before splitting, instead of the
    /// leakage-safe default of standardizing inside each fit.
    pub paper_standardize: bool,
    /// Per-strategy tuning-grid overrides.
    pub grid_overrides: BTreeMap<String, Grid>,
    pub cv_folds: usize,
    /// Stop dispatching new jobs after this many completions (checkpoint
    /// stays consistent); used to exercise interruption and resume.
    pub job_limit: Option<usize>,
}

impl RunConfig {
    pub fn new(collection_dir: impl Into<PathBuf>, strategy_ids: Vec<String>) -> Self {
        RunConfig {
            collection_dir: collection_dir.into(),
            strategy_ids,
            split_ratio: 2.0 / 3.0,
            master_seed: 0,
            parallelism: 1,
            paper_standardize: false,
            grid_overrides: BTreeMap::new(),
            cv_folds: 5,
            job_limit: None,
        }
    }

    /// Digest over everything that affects results (parallelism and the
    /// job limit only affect scheduling).
    pub fn config_digest(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            strategy_ids: &'a [String],
            split_ratio: f64,
            master_seed: u64,
            paper_standardize: bool,
            grid_overrides: &'a BTreeMap<String, Grid>,
            cv_folds: usize,
        }
        let canon = Canonical {
            strategy_ids: &self.strategy_ids,
            split_ratio: self.split_ratio,
            master_seed: self.master_seed,
            paper_standardize: self.paper_standardize,
            grid_overrides: &self.grid_overrides,
            cv_folds: self.cv_folds,
        };
        crate::datastore::sha256_hex(serde_json::to_string(&canon).unwrap().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Jobs computed by this invocation.
    pub completed: usize,
    /// Jobs skipped because a checkpoint already covered them.
    pub skipped: usize,
    pub failed: Vec<FailedPair>,
    pub wall_time_secs: f64,
}

struct Job {
    dataset_id: String,
    dataset_name: String,
    strategy: StrategyDescriptor,
    grid: Grid,
}

struct JobOutcome {
    dataset_id: String,
    dataset_name: String,
    strategy_id: String,
    result: Result<PredictionRecord, String>,
}

/// Runs the full cross product of datasets and strategies, resuming from
/// the checkpoint when one exists. Job failures are quarantined per pair
/// and do not abort the run.
pub fn run(config: &RunConfig) -> Result<RunSummary, OrchestratorError> {
    let started = Instant::now();
    let collection = Collection::open(&config.collection_dir)?;
    if config.strategy_ids.is_empty() {
        return Err(OrchestratorError::NoStrategies);
    }
    let mut strategies = Vec::new();
    for id in &config.strategy_ids {
        strategies.push(learners::descriptor(id)?);
    }
    let dataset_ids = collection.dataset_ids()?;
    if dataset_ids.is_empty() {
        return Err(OrchestratorError::NoDatasets);
    }
    let config_digest = config.config_digest();

    // Resume if a checkpoint exists; a checkpoint against different data or
    // config is rejected rather than silently recomputed.
    let mut state = match collection.checkpoint_read(&config_digest) {
        Ok(state) => state,
        Err(DataError::NotFound(_)) => {
            // Splits persisted earlier (e.g. via the split subcommand) are
            // reused; only missing ones are generated on demand.
            for id in &dataset_ids {
                if collection.has_split(id) {
                    continue;
                }
                let dataset = collection.load_dataset(id)?;
                let seed = rng::derive_seed(config.master_seed, &["split", id]);
                let split =
                    crate::datastore::generate_split(&dataset, config.split_ratio, seed)?;
                collection.save_split(&split)?;
            }
            RunState::new(collection.collection_digest()?, config_digest.clone())
        }
        Err(e @ DataError::DigestMismatch { .. }) => {
            return Err(OrchestratorError::ResumeRejected(e))
        }
        Err(e) => return Err(OrchestratorError::Data(e)),
    };

    // Preload datasets and splits; jobs only read from these.
    let mut datasets: BTreeMap<String, Arc<Dataset>> = BTreeMap::new();
    let mut splits: BTreeMap<String, SplitSpec> = BTreeMap::new();
    for id in &dataset_ids {
        let mut dataset = collection.load_dataset(id)?;
        if config.paper_standardize {
            let stats = standardize_fit(&dataset.features);
            dataset.features = standardize_apply(&stats, &dataset.features);
        }
        splits.insert(id.clone(), collection.load_split(id)?);
        datasets.insert(id.clone(), Arc::new(dataset));
    }

    let mut jobs: Vec<Job> = Vec::new();
    let mut skipped = 0usize;
    for id in &dataset_ids {
        for strategy in &strategies {
            if state.is_completed(id, &strategy.id) || state.is_failed(id, &strategy.id) {
                skipped += 1;
                continue;
            }
            let grid = config
                .grid_overrides
                .get(&strategy.id)
                .cloned()
                .unwrap_or_else(|| strategy.default_grid.clone());
            jobs.push(Job {
                dataset_id: id.clone(),
                dataset_name: datasets[id].name.clone(),
                strategy: strategy.clone(),
                grid,
            });
        }
    }
    if let Some(limit) = config.job_limit {
        jobs.truncate(limit);
    }

    let master_seed = config.master_seed;
    let paper_standardize = config.paper_standardize;
    let cv_folds = config.cv_folds;
    let n_jobs = jobs.len();
    let jobs = Arc::new(jobs);
    let cursor = Arc::new(AtomicUsize::new(0));
    let (tx, rx) = mpsc::channel::<JobOutcome>();
    let workers = config.parallelism.clamp(1, n_jobs.max(1));
    let mut completed_now = 0usize;
    let mut failed_now: Vec<FailedPair> = Vec::new();

    std::thread::scope(|scope| -> Result<(), OrchestratorError> {
        for _ in 0..workers {
            let jobs = Arc::clone(&jobs);
            let cursor = Arc::clone(&cursor);
            let tx = tx.clone();
            let datasets = &datasets;
            let splits = &splits;
            scope.spawn(move || loop {
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let job = &jobs[i];
                let dataset = &datasets[&job.dataset_id];
                let split = &splits[&job.dataset_id];
                let result = execute_job(
                    dataset,
                    split,
                    &job.strategy,
                    &job.grid,
                    master_seed,
                    cv_folds,
                    paper_standardize,
                );
                let outcome = JobOutcome {
                    dataset_id: job.dataset_id.clone(),
                    dataset_name: job.dataset_name.clone(),
                    strategy_id: job.strategy.id.clone(),
                    result,
                };
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        // Single writer: predictions and checkpoints are serialized here.
        for outcome in rx {
            match outcome.result {
                Ok(record) => {
                    let digest = collection.save_prediction(&record)?;
                    state.completed.push(CompletedPair {
                        dataset_id: outcome.dataset_id.clone(),
                        strategy_id: outcome.strategy_id.clone(),
                        prediction_digest: digest,
                    });
                    completed_now += 1;
                    eprintln!(
                        "{} trained on dataset {}",
                        outcome.strategy_id, outcome.dataset_name
                    );
                }
                Err(error) => {
                    state.failed.push(FailedPair {
                        dataset_id: outcome.dataset_id.clone(),
                        strategy_id: outcome.strategy_id.clone(),
                        error: error.clone(),
                    });
                    failed_now.push(state.failed.last().unwrap().clone());
                    eprintln!(
                        "{} failed on dataset {}: {}",
                        outcome.strategy_id, outcome.dataset_name, error
                    );
                }
            }
            collection.checkpoint_write(&state)?;
        }
        Ok(())
    })?;

    Ok(RunSummary {
        completed: completed_now,
        skipped,
        failed: failed_now,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Tunes, fits and predicts one (dataset, strategy) pair. Only training
/// rows reach the tuner and the fit; predictions are made on the test rows.
fn execute_job(
    dataset: &Dataset,
    split: &SplitSpec,
    strategy: &StrategyDescriptor,
    grid: &Grid,
    master_seed: u64,
    cv_folds: usize,
    paper_standardize: bool,
) -> Result<PredictionRecord, String> {
    let job_seed = rng::derive_seed(master_seed, &[&dataset.id, &strategy.id]);
    let train_x = dataset.features.select_rows(&split.train_indices);
    let train_y: Vec<f64> = split.train_indices.iter().map(|&i| dataset.labels[i]).collect();

    // With collection-wide standardization the per-fit pass is disabled.
    let mut effective = strategy.clone();
    if paper_standardize {
        effective.requires_standardization = false;
    }

    let t0 = Instant::now();
    let (chosen, tuning_report) = if grid.is_empty() {
        (HyperParams::new(), TuningReport::untuned())
    } else {
        let tune_seed = rng::derive_seed(job_seed, &["tune"]);
        learners::tune(&effective, grid, &train_x, &train_y, cv_folds, tune_seed)
            .map_err(|e| e.to_string())?
    };
    let fit_seed = rng::derive_seed(job_seed, &["fit"]);
    let model = learners::fit(&effective, &chosen, &train_x, &train_y, fit_seed)
        .map_err(|e| e.to_string())?;
    let training_time = t0.elapsed().as_secs_f64();

    let test_x = dataset.features.select_rows(&split.test_indices);
    let predicted_labels = learners::predict(&model, &test_x).map_err(|e| e.to_string())?;
    Ok(PredictionRecord {
        format_version: FORMAT_VERSION,
        dataset_id: dataset.id.clone(),
        strategy_id: strategy.id.clone(),
        predicted_labels,
        training_time,
        tuning_report,
    })
}

/// Parameters of a generated collection of Gaussian-blob classification
/// datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_datasets: usize,
    pub n_per_dataset: usize,
    pub n_features: usize,
    /// Euclidean distance between the two class centers, in units of the
    /// within-class standard deviation (1.0).
    pub class_separation: f64,
    pub seed: u64,
}

/// Generates a deterministic two-class collection: per dataset, a random
/// unit direction separates the class centers by `class_separation`.
pub fn synth_collection(spec: &SynthSpec, out_dir: &PathBuf) -> Result<Collection, OrchestratorError> {
    assert!(
        spec.n_datasets > 0 && spec.n_per_dataset >= 2 && spec.n_features > 0,
        "all counts must be positive"
    );
    let collection = Collection::open(out_dir)?;
    for i in 0..spec.n_datasets {
        let id = format!("synth_{i:02}");
        let mut rng = rng::rng_from_seed(rng::derive_seed(spec.seed, &["synth", &id]));
        let mut direction: Vec<f64> = (0..spec.n_features)
            .map(|_| rng::standard_normal(&mut rng))
            .collect();
        let norm: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut direction {
                *v /= norm;
            }
        } else {
            direction[0] = 1.0;
        }
        let n1 = spec.n_per_dataset / 2;
        let mut rows = Vec::with_capacity(spec.n_per_dataset);
        let mut labels = Vec::with_capacity(spec.n_per_dataset);
        for j in 0..spec.n_per_dataset {
            let class = usize::from(j >= spec.n_per_dataset - n1);
            let row: Vec<f64> = direction
                .iter()
                .map(|&u| {
                    class as f64 * spec.class_separation * u + rng::standard_normal(&mut rng)
                })
                .collect();
            rows.push(row);
            labels.push(class as f64);
        }
        let features = Matrix::from_rows(&rows);
        let constant_columns = (0..features.n_cols())
            .filter(|&j| {
                let col = features.column(j);
                col.iter().all(|&v| v == col[0])
            })
            .map(|j| format!("f{}", j + 1))
            .collect();
        let dataset = Dataset {
            id: id.clone(),
            name: id.clone(),
            source: "synthetic".into(),
            target_column: "label".into(),
            features,
            labels,
            column_names: (1..=spec.n_features).map(|j| format!("f{j}")).collect(),
            label_names: None,
            constant_columns,
        };
        collection.save_dataset(&dataset)?;
    }
    Ok(collection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn small_spec(dir: &std::path::Path) -> RunConfig {
        let spec = SynthSpec {
            n_datasets: 2,
            n_per_dataset: 30,
            n_features: 2,
            class_separation: 6.0,
            seed: 9,
        };
        synth_collection(&spec, &dir.to_path_buf()).unwrap();
        let mut config = RunConfig::new(
            dir,
            vec!["Baseline".into(), "GaussianNB".into(), "KNN".into()],
        );
        // Small grid keeps the unit test quick.
        config.grid_overrides.insert(
            "KNN".into(),
            Grid::from([
                ("n_neighbors".to_string(), vec![1.0, 5.0]),
                ("p".to_string(), vec![2.0]),
            ]),
        );
        config.master_seed = 42;
        config
    }

    #[test]
    fn fresh_run_covers_cross_product() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_spec(dir.path());
        let summary = run(&config).unwrap();
        assert_eq!(summary.completed, 6);
        assert_eq!(summary.skipped, 0);
        assert!(summary.failed.is_empty());
        let collection = Collection::open(dir.path()).unwrap();
        let state = collection.checkpoint_read(&config.config_digest()).unwrap();
        assert_eq!(state.completed.len(), 6);
    }

    #[test]
    fn rerun_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_spec(dir.path());
        run(&config).unwrap();
        let summary = run(&config).unwrap();
        assert_eq!(summary.completed, 0);
        assert_eq!(summary.skipped, 6);
    }

    #[test]
    fn resume_after_interruption_matches_uninterrupted() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut config_a = small_spec(dir_a.path());
        let config_b = small_spec(dir_b.path());
        // Interrupt after 3 of 6 jobs, then resume.
        config_a.job_limit = Some(3);
        run(&config_a).unwrap();
        config_a.job_limit = None;
        let resumed = run(&config_a).unwrap();
        assert_eq!(resumed.skipped, 3);
        run(&config_b).unwrap();
        // Prediction artifacts agree apart from measured wall time.
        for strategy in ["Baseline", "GaussianNB", "KNN"] {
            for dataset in ["synth_00", "synth_01"] {
                let ca = Collection::open(dir_a.path()).unwrap();
                let cb = Collection::open(dir_b.path()).unwrap();
                let mut a = ca.load_prediction(strategy, dataset).unwrap();
                let mut b = cb.load_prediction(strategy, dataset).unwrap();
                a.training_time = 0.0;
                b.training_time = 0.0;
                assert_eq!(a, b, "{strategy}/{dataset}");
            }
        }
    }

    #[test]
    fn parallel_and_serial_agree() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let config_a = small_spec(dir_a.path());
        let mut config_b = small_spec(dir_b.path());
        config_b.parallelism = 4;
        run(&config_a).unwrap();
        run(&config_b).unwrap();
        let ca = Collection::open(dir_a.path()).unwrap();
        let cb = Collection::open(dir_b.path()).unwrap();
        for strategy in ["Baseline", "GaussianNB", "KNN"] {
            for dataset in ["synth_00", "synth_01"] {
                let mut a = ca.load_prediction(strategy, dataset).unwrap();
                let mut b = cb.load_prediction(strategy, dataset).unwrap();
                a.training_time = 0.0;
                b.training_time = 0.0;
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn failures_are_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        // One single-class dataset trips PassiveAggressive; others proceed.
        let spec = SynthSpec {
            n_datasets: 1,
            n_per_dataset: 20,
            n_features: 2,
            class_separation: 4.0,
            seed: 3,
        };
        let collection = synth_collection(&spec, &dir.path().to_path_buf()).unwrap();
        let mut broken = collection.load_dataset("synth_00").unwrap();
        broken.id = "single".into();
        broken.name = "single".into();
        broken.labels = vec![1.0; broken.labels.len()];
        collection.save_dataset(&broken).unwrap();

        let mut config = RunConfig::new(
            dir.path(),
            vec!["Baseline".into(), "PassiveAggressive".into()],
        );
        config.master_seed = 7;
        let summary = run(&config).unwrap();
        assert_eq!(summary.failed.len(), 1);
        assert_eq!(summary.failed[0].dataset_id, "single");
        assert_eq!(summary.failed[0].strategy_id, "PassiveAggressive");
        // 3 of 4 pairs succeeded.
        assert_eq!(summary.completed, 3);
        // Failed pairs are not retried on resume.
        let summary = run(&config).unwrap();
        assert_eq!(summary.skipped, 4);
    }

    #[test]
    fn resume_rejected_when_collection_changes() {
        let dir = tempfile::tempdir().unwrap();
        let config = small_spec(dir.path());
        run(&config).unwrap();
        let csv = dir.path().join("datasets/synth_00.csv");
        let mut text = fs::read_to_string(&csv).unwrap();
        text.push_str("1,1,0\n");
        fs::write(&csv, text).unwrap();
        assert!(matches!(
            run(&config).unwrap_err(),
            OrchestratorError::ResumeRejected(_)
        ));
    }

    #[test]
    fn synth_deterministic_bytes() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            n_datasets: 2,
            n_per_dataset: 25,
            n_features: 3,
            class_separation: 1.5,
            seed: 11,
        };
        synth_collection(&spec, &dir_a.path().to_path_buf()).unwrap();
        synth_collection(&spec, &dir_b.path().to_path_buf()).unwrap();
        for id in ["synth_00", "synth_01"] {
            let a = fs::read(dir_a.path().join(format!("datasets/{id}.csv"))).unwrap();
            let b = fs::read(dir_b.path().join(format!("datasets/{id}.csv"))).unwrap();
            assert_eq!(a, b);
        }
    }
}
