//! Dataset ingestion, deterministic train/test splits and the on-disk
//! collection layout.
//!
//! A collection is one directory: `datasets/<id>.csv` plus
//! `<id>.meta.json`, `splits/<id>.split.json`,
//! `predictions/<strategy>/<dataset>.json` and `checkpoint.json`. Every
//! JSON document carries a `format_version` field. Checkpoint and
//! prediction writes go through write-temp-then-rename so readers never
//! observe torn files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::learners::TuningReport;
use crate::matrix::Matrix;
use crate::rng;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("target column {0} not found in CSV header")]
    MissingTarget(String),
    #[error("CSV is not rectangular near record {0}")]
    NonRectangular(u64),
    #[error("dataset needs at least 2 rows, got {0}")]
    EmptyDataset(usize),
    #[error("split ratio must lie in (0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("split would leave an empty side (n = {n}, train = {train})")]
    DegenerateSplit { n: usize, train: usize },
    #[error("{what} digest mismatch: checkpoint has {expected}, current is {actual}")]
    DigestMismatch {
        what: String,
        expected: String,
        actual: String,
    },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("invalid id {0:?}: use ASCII letters, digits, '-', '_' or '.'")]
    InvalidId(String),
    #[error("not found: {0}")]
    NotFound(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// How non-numeric feature columns are encoded at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CategoricalEncoding {
    /// First-appearance integer codes 0, 1, 2, ...
    #[default]
    Integer,
    /// One indicator column per distinct value, in first-appearance order.
    OneHot,
}

/// An ingested dataset: encoded feature matrix, labels and metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub name: String,
    pub source: String,
    pub target_column: String,
    pub features: Matrix,
    pub labels: Vec<f64>,
    /// Feature column names after encoding.
    pub column_names: Vec<String>,
    /// Original label strings when the target was categorical, indexed by
    /// the integer code.
    pub label_names: Option<Vec<String>>,
    /// Feature columns that were constant at ingestion; allowed, but
    /// flagged.
    pub constant_columns: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct IngestMeta {
    pub id: String,
    pub name: String,
    pub source: String,
    pub target_column: String,
}

/// Persisted train/test index split for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub format_version: u32,
    pub dataset_id: String,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Predictions of one strategy on one dataset's test rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub format_version: u32,
    pub dataset_id: String,
    pub strategy_id: String,
    /// Aligned to the split's test_indices.
    pub predicted_labels: Vec<f64>,
    /// Wall-clock seconds around tuning + fitting. The one field that is
    /// not a deterministic function of the inputs.
    pub training_time: f64,
    pub tuning_report: TuningReport,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompletedPair {
    pub dataset_id: String,
    pub strategy_id: String,
    pub prediction_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailedPair {
    pub dataset_id: String,
    pub strategy_id: String,
    pub error: String,
}

/// Durable record of benchmark progress; the resume anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub format_version: u32,
    pub collection_digest: String,
    pub config_digest: String,
    /// Sorted; each entry's prediction file must exist with the recorded
    /// digest.
    pub completed: Vec<CompletedPair>,
    pub failed: Vec<FailedPair>,
    pub in_progress: Option<(String, String)>,
}

impl RunState {
    pub fn new(collection_digest: String, config_digest: String) -> Self {
        RunState {
            format_version: FORMAT_VERSION,
            collection_digest,
            config_digest,
            completed: Vec::new(),
            failed: Vec::new(),
            in_progress: None,
        }
    }

    pub fn is_completed(&self, dataset_id: &str, strategy_id: &str) -> bool {
        self.completed
            .iter()
            .any(|p| p.dataset_id == dataset_id && p.strategy_id == strategy_id)
    }

    pub fn is_failed(&self, dataset_id: &str, strategy_id: &str) -> bool {
        self.failed
            .iter()
            .any(|p| p.dataset_id == dataset_id && p.strategy_id == strategy_id)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Dataset and strategy ids become file names; keep them to a portable
/// character set.
pub fn validate_id(id: &str) -> Result<(), DataError> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(DataError::InvalidId(id.to_string()))
    }
}

/// Atomic file write: temp file in the same directory, flushed, renamed.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DataError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_all_numeric(values: &[String]) -> Option<Vec<f64>> {
    values
        .iter()
        .map(|v| v.trim().parse::<f64>().ok())
        .collect()
}

fn first_appearance_codes(values: &[String]) -> (Vec<f64>, Vec<String>) {
    let mut seen: Vec<String> = Vec::new();
    let codes = values
        .iter()
        .map(|v| {
            if let Some(pos) = seen.iter().position(|s| s == v) {
                pos as f64
            } else {
                seen.push(v.clone());
                (seen.len() - 1) as f64
            }
        })
        .collect();
    (codes, seen)
}

/// Parses a CSV file (header row required) into a [`Dataset`].
///
/// Numeric columns parse as reals; non-numeric feature columns are encoded
/// per `encoding`; a non-numeric target gets first-appearance integer codes.
pub fn ingest_dataset(
    csv_path: &Path,
    meta: &IngestMeta,
    encoding: CategoricalEncoding,
) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(csv_path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == &meta.target_column)
        .ok_or_else(|| DataError::MissingTarget(meta.target_column.clone()))?;
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for (row_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => DataError::NonRectangular(row_no as u64 + 1),
            _ => DataError::Csv(e),
        })?;
        for (j, field) in record.iter().enumerate() {
            columns[j].push(field.to_string());
        }
    }
    let n = columns[target_idx].len();
    if n < 2 {
        return Err(DataError::EmptyDataset(n));
    }

    let (labels, label_names) = match parse_all_numeric(&columns[target_idx]) {
        Some(nums) => (nums, None),
        None => {
            let (codes, names) = first_appearance_codes(&columns[target_idx]);
            (codes, Some(names))
        }
    };

    let mut feature_cols: Vec<(String, Vec<f64>)> = Vec::new();
    for (j, header) in headers.iter().enumerate() {
        if j == target_idx {
            continue;
        }
        match parse_all_numeric(&columns[j]) {
            Some(nums) => feature_cols.push((header.clone(), nums)),
            None => match encoding {
                CategoricalEncoding::Integer => {
                    let (codes, _) = first_appearance_codes(&columns[j]);
                    feature_cols.push((header.clone(), codes));
                }
                CategoricalEncoding::OneHot => {
                    let (codes, names) = first_appearance_codes(&columns[j]);
                    for (value_idx, value) in names.iter().enumerate() {
                        let indicator = codes
                            .iter()
                            .map(|&c| f64::from(c == value_idx as f64))
                            .collect();
                        feature_cols.push((format!("{header}={value}"), indicator));
                    }
                }
            },
        }
    }

    let column_names: Vec<String> = feature_cols.iter().map(|(h, _)| h.clone()).collect();
    let constant_columns = feature_cols
        .iter()
        .filter(|(_, col)| col.iter().all(|&v| v == col[0]))
        .map(|(h, _)| h.clone())
        .collect();
    let mut features = Matrix::zeros(n, feature_cols.len());
    for (j, (_, col)) in feature_cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            features.set(i, j, v);
        }
    }
    Ok(Dataset {
        id: meta.id.clone(),
        name: meta.name.clone(),
        source: meta.source.clone(),
        target_column: meta.target_column.clone(),
        features,
        labels,
        column_names,
        label_names,
        constant_columns,
    })
}

/// Deterministic train/test split: seeded Fisher-Yates shuffle of 0..n,
/// first round(ratio * n) indices (half away from zero) form the training
/// set. Indices are stored sorted.
pub fn generate_split(dataset: &Dataset, ratio: f64, seed: u64) -> Result<SplitSpec, DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::InvalidRatio(ratio));
    }
    let n = dataset.labels.len();
    if n < 2 {
        return Err(DataError::EmptyDataset(n));
    }
    let n_train = (ratio * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(DataError::DegenerateSplit { n, train: n_train });
    }
    let mut rng = rng::rng_from_seed(seed);
    let shuffled = rng::shuffled_indices(n, &mut rng);
    let mut train: Vec<usize> = shuffled[..n_train].to_vec();
    let mut test: Vec<usize> = shuffled[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitSpec {
        format_version: FORMAT_VERSION,
        dataset_id: dataset.id.clone(),
        train_indices: train,
        test_indices: test,
        seed,
        ratio,
    })
}

/// Metadata sidecar persisted next to each canonical dataset CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetMetaFile {
    format_version: u32,
    id: String,
    name: String,
    source: String,
    target_column: String,
    label_names: Option<Vec<String>>,
    constant_columns: Vec<String>,
}

/// Handle to a collection directory.
#[derive(Debug, Clone)]
pub struct Collection {
    root: PathBuf,
}

impl Collection {
    /// Opens (creating directories as needed) a collection rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, DataError> {
        let root = root.into();
        fs::create_dir_all(root.join("datasets"))?;
        fs::create_dir_all(root.join("splits"))?;
        fs::create_dir_all(root.join("predictions"))?;
        Ok(Collection { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dataset_csv(&self, id: &str) -> PathBuf {
        self.root.join("datasets").join(format!("{id}.csv"))
    }

    fn dataset_meta(&self, id: &str) -> PathBuf {
        self.root.join("datasets").join(format!("{id}.meta.json"))
    }

    fn split_path(&self, id: &str) -> PathBuf {
        self.root.join("splits").join(format!("{id}.split.json"))
    }

    fn prediction_path(&self, strategy_id: &str, dataset_id: &str) -> PathBuf {
        self.root
            .join("predictions")
            .join(strategy_id)
            .join(format!("{dataset_id}.json"))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.root.join("checkpoint.json")
    }

    /// Sorted ids of all stored datasets.
    pub fn dataset_ids(&self) -> Result<Vec<String>, DataError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(self.root.join("datasets"))? {
            let name = entry?.file_name().to_string_lossy().to_string();
            if let Some(id) = name.strip_suffix(".meta.json") {
                ids.push(id.to_string());
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Writes the canonical CSV copy and metadata sidecar.
    pub fn save_dataset(&self, dataset: &Dataset) -> Result<(), DataError> {
        validate_id(&dataset.id)?;
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = dataset.column_names.clone();
        header.push(dataset.target_column.clone());
        writer.write_record(&header)?;
        for i in 0..dataset.features.n_rows() {
            let mut fields: Vec<String> =
                dataset.features.row(i).iter().map(|v| format!("{v}")).collect();
            fields.push(format!("{}", dataset.labels[i]));
            writer.write_record(&fields)?;
        }
        let csv_bytes = writer
            .into_inner()
            .map_err(|e| DataError::Io(std::io::Error::other(e)))?;
        write_atomic(&self.dataset_csv(&dataset.id), &csv_bytes)?;
        let meta = DatasetMetaFile {
            format_version: FORMAT_VERSION,
            id: dataset.id.clone(),
            name: dataset.name.clone(),
            source: dataset.source.clone(),
            target_column: dataset.target_column.clone(),
            label_names: dataset.label_names.clone(),
            constant_columns: dataset.constant_columns.clone(),
        };
        let json = serde_json::to_vec_pretty(&meta)?;
        write_atomic(&self.dataset_meta(&dataset.id), &json)?;
        Ok(())
    }

    pub fn load_dataset(&self, id: &str) -> Result<Dataset, DataError> {
        let meta_path = self.dataset_meta(id);
        if !meta_path.exists() {
            return Err(DataError::NotFound(meta_path));
        }
        let meta: DatasetMetaFile = serde_json::from_slice(&fs::read(meta_path)?)?;
        let ingest = IngestMeta {
            id: meta.id,
            name: meta.name,
            source: meta.source,
            target_column: meta.target_column,
        };
        // The canonical copy is fully numeric, so re-ingesting reproduces
        // the matrix exactly; encoding metadata rides along from the sidecar.
        let mut dataset = ingest_dataset(
            &self.dataset_csv(id),
            &ingest,
            CategoricalEncoding::Integer,
        )?;
        dataset.label_names = meta.label_names;
        dataset.constant_columns = meta.constant_columns;
        Ok(dataset)
    }

    pub fn save_split(&self, split: &SplitSpec) -> Result<(), DataError> {
        let json = serde_json::to_vec_pretty(split)?;
        write_atomic(&self.split_path(&split.dataset_id), &json)?;
        Ok(())
    }

    pub fn load_split(&self, dataset_id: &str) -> Result<SplitSpec, DataError> {
        let path = self.split_path(dataset_id);
        if !path.exists() {
            return Err(DataError::NotFound(path));
        }
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn has_split(&self, dataset_id: &str) -> bool {
        self.split_path(dataset_id).exists()
    }

    /// Persists a prediction record; returns the file's digest.
    pub fn save_prediction(&self, record: &PredictionRecord) -> Result<String, DataError> {
        let path = self.prediction_path(&record.strategy_id, &record.dataset_id);
        fs::create_dir_all(path.parent().unwrap())?;
        let json = serde_json::to_vec_pretty(record)?;
        write_atomic(&path, &json)?;
        Ok(sha256_hex(&json))
    }

    pub fn load_prediction(
        &self,
        strategy_id: &str,
        dataset_id: &str,
    ) -> Result<PredictionRecord, DataError> {
        let path = self.prediction_path(strategy_id, dataset_id);
        if !path.exists() {
            return Err(DataError::NotFound(path));
        }
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn has_prediction(&self, strategy_id: &str, dataset_id: &str) -> bool {
        self.prediction_path(strategy_id, dataset_id).exists()
    }

    /// Loads every prediction record for the given strategies, keyed by
    /// (dataset_id, strategy_id). Missing pairs are simply absent.
    pub fn load_predictions(
        &self,
        strategy_ids: &[String],
    ) -> Result<BTreeMap<(String, String), PredictionRecord>, DataError> {
        let mut out = BTreeMap::new();
        for dataset_id in self.dataset_ids()? {
            for strategy_id in strategy_ids {
                if self.has_prediction(strategy_id, &dataset_id) {
                    let rec = self.load_prediction(strategy_id, &dataset_id)?;
                    out.insert((dataset_id.clone(), strategy_id.clone()), rec);
                }
            }
        }
        Ok(out)
    }

    /// Content hash over datasets and splits (sorted relative paths and
    /// file bytes).
    pub fn collection_digest(&self) -> Result<String, DataError> {
        let mut hasher = Sha256::new();
        for sub in ["datasets", "splits"] {
            let dir = self.root.join(sub);
            let mut names: Vec<String> = fs::read_dir(&dir)?
                .map(|e| Ok(e?.file_name().to_string_lossy().to_string()))
                .collect::<Result<_, DataError>>()?;
            names.sort();
            for name in names {
                if name.ends_with(".tmp") {
                    continue;
                }
                hasher.update(sub.as_bytes());
                hasher.update(b"/");
                hasher.update(name.as_bytes());
                hasher.update([0u8]);
                hasher.update(&fs::read(dir.join(&name))?);
            }
        }
        Ok(format!("{:x}", hasher.finalize()))
    }

    /// Atomically commits the run state.
    pub fn checkpoint_write(&self, state: &RunState) -> Result<(), DataError> {
        let mut state = state.clone();
        state.completed.sort();
        state.failed.sort();
        let json = serde_json::to_vec_pretty(&state)?;
        write_atomic(&self.checkpoint_path(), &json)
    }

    /// Reads the last committed run state and validates it against the
    /// current collection and config digests and the recorded per-pair
    /// prediction digests.
    pub fn checkpoint_read(&self, config_digest: &str) -> Result<RunState, DataError> {
        let path = self.checkpoint_path();
        if !path.exists() {
            return Err(DataError::NotFound(path));
        }
        let state: RunState = serde_json::from_slice(&fs::read(&path)?)
            .map_err(|e| DataError::CorruptCheckpoint(e.to_string()))?;
        if state.format_version != FORMAT_VERSION {
            return Err(DataError::CorruptCheckpoint(format!(
                "unsupported format_version {}",
                state.format_version
            )));
        }
        let current = self.collection_digest()?;
        if state.collection_digest != current {
            return Err(DataError::DigestMismatch {
                what: "collection".into(),
                expected: state.collection_digest,
                actual: current,
            });
        }
        if state.config_digest != config_digest {
            return Err(DataError::DigestMismatch {
                what: "config".into(),
                expected: state.config_digest,
                actual: config_digest.to_string(),
            });
        }
        for pair in &state.completed {
            let path = self.prediction_path(&pair.strategy_id, &pair.dataset_id);
            let bytes = fs::read(&path).map_err(|_| {
                DataError::CorruptCheckpoint(format!(
                    "completed pair ({}, {}) has no prediction file",
                    pair.dataset_id, pair.strategy_id
                ))
            })?;
            let digest = sha256_hex(&bytes);
            if digest != pair.prediction_digest {
                return Err(DataError::CorruptCheckpoint(format!(
                    "prediction digest mismatch for ({}, {})",
                    pair.dataset_id, pair.strategy_id
                )));
            }
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_csv(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    fn meta(id: &str) -> IngestMeta {
        IngestMeta {
            id: id.into(),
            name: id.into(),
            source: "test".into(),
            target_column: "label".into(),
        }
    }

    #[test]
    fn ingest_simple_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            dir.path(),
            "d.csv",
            "f1,f2,label\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n",
        );
        let d = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap();
        assert_eq!(d.features.n_rows(), 4);
        assert_eq!(d.features.n_cols(), 2);
        assert_eq!(d.labels, vec![0.0, 1.0, 0.0, 1.0]);
        assert!(d.constant_columns.is_empty());
    }

    #[test]
    fn ingest_missing_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f1,f2\n1,2\n3,4\n");
        let err = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap_err();
        assert!(matches!(err, DataError::MissingTarget(_)));
    }

    #[test]
    fn ingest_categorical_first_appearance() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f,label\na,0\nb,1\na,0\n");
        let d = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap();
        assert_eq!(d.features.column(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn ingest_one_hot() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f,label\na,0\nb,1\nc,0\n");
        let d = ingest_dataset(&p, &meta("d"), CategoricalEncoding::OneHot).unwrap();
        assert_eq!(d.column_names, vec!["f=a", "f=b", "f=c"]);
        assert_eq!(d.features.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(d.features.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(d.features.row(2), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn ingest_categorical_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f,label\n1,yes\n2,no\n3,yes\n");
        let d = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap();
        assert_eq!(d.labels, vec![0.0, 1.0, 0.0]);
        assert_eq!(d.label_names, Some(vec!["yes".into(), "no".into()]));
    }

    #[test]
    fn ingest_too_small() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f,label\n1,0\n");
        let err = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap_err();
        assert!(matches!(err, DataError::EmptyDataset(1)));
    }

    #[test]
    fn ingest_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f1,f2,label\n1,2,0\n3,4\n");
        let err = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap_err();
        assert!(matches!(err, DataError::NonRectangular(_)));
    }

    #[test]
    fn awkward_column_names_survive_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let mut d = tiny_dataset("cols", 4);
        d.column_names = vec!["a,b".into(), "c \"q\"".into()];
        c.save_dataset(&d).unwrap();
        let loaded = c.load_dataset("cols").unwrap();
        assert_eq!(loaded.column_names, d.column_names);
        assert_eq!(loaded.features, d.features);
    }

    #[test]
    fn ids_are_validated() {
        assert!(validate_id("iris-2.0_a").is_ok());
        for bad in ["", "a/b", "..", "a b", "ü"] {
            assert!(matches!(validate_id(bad), Err(DataError::InvalidId(_))), "{bad}");
        }
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let mut d = tiny_dataset("x", 4);
        d.id = "../escape".into();
        assert!(matches!(
            c.save_dataset(&d).unwrap_err(),
            DataError::InvalidId(_)
        ));
    }

    #[test]
    fn ingest_flags_constant_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "d.csv", "f1,f2,label\n1,5,0\n2,5,1\n3,5,0\n");
        let d = ingest_dataset(&p, &meta("d"), CategoricalEncoding::Integer).unwrap();
        assert_eq!(d.constant_columns, vec!["f2"]);
    }

    fn tiny_dataset(id: &str, n: usize) -> Dataset {
        Dataset {
            id: id.into(),
            name: id.into(),
            source: "test".into(),
            target_column: "label".into(),
            features: Matrix::from_rows(
                &(0..n).map(|i| vec![i as f64, (i * i) as f64 * 0.125]).collect::<Vec<_>>(),
            ),
            labels: (0..n).map(|i| (i % 2) as f64).collect(),
            column_names: vec!["f1".into(), "f2".into()],
            label_names: None,
            constant_columns: vec![],
        }
    }

    #[test]
    fn split_rounding() {
        // n = 3, ratio = 2/3 forces a 2/1 split.
        let d = tiny_dataset("a", 3);
        let s = generate_split(&d, 2.0 / 3.0, 0).unwrap();
        assert_eq!(s.train_indices.len(), 2);
        assert_eq!(s.test_indices.len(), 1);
        // n = 121: round(80.67) = 81.
        let d = tiny_dataset("b", 121);
        let s = generate_split(&d, 2.0 / 3.0, 0).unwrap();
        assert_eq!(s.train_indices.len(), 81);
        assert_eq!(s.test_indices.len(), 40);
    }

    #[test]
    fn split_is_valid_partition() {
        let d = tiny_dataset("a", 57);
        let s = generate_split(&d, 0.7, 99).unwrap();
        let mut all: Vec<usize> = s
            .train_indices
            .iter()
            .chain(&s.test_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..57).collect::<Vec<_>>());
    }

    #[test]
    fn split_deterministic_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let d = tiny_dataset("a", 20);
        let s1 = generate_split(&d, 2.0 / 3.0, 5).unwrap();
        c.save_split(&s1).unwrap();
        let bytes1 = fs::read(dir.path().join("splits/a.split.json")).unwrap();
        let s2 = generate_split(&d, 2.0 / 3.0, 5).unwrap();
        c.save_split(&s2).unwrap();
        let bytes2 = fs::read(dir.path().join("splits/a.split.json")).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn split_degenerate() {
        let d = tiny_dataset("a", 3);
        let err = generate_split(&d, 0.01, 0).unwrap_err();
        assert!(matches!(err, DataError::DegenerateSplit { .. }));
    }

    #[test]
    fn dataset_round_trip_exact() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let mut d = tiny_dataset("rt", 9);
        // Awkward reals that need full round-trip precision.
        d.features.set(0, 0, 0.1 + 0.2);
        d.features.set(1, 1, 1.0 / 3.0);
        d.features.set(2, 0, f64::MIN_POSITIVE);
        c.save_dataset(&d).unwrap();
        let loaded = c.load_dataset("rt").unwrap();
        assert_eq!(loaded.features, d.features);
        assert_eq!(loaded.labels, d.labels);
        assert_eq!(loaded.column_names, d.column_names);
    }

    #[test]
    fn checkpoint_round_trip_and_atomicity() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let d = tiny_dataset("a", 10);
        c.save_dataset(&d).unwrap();
        c.save_split(&generate_split(&d, 0.5, 1).unwrap()).unwrap();
        let collection_digest = c.collection_digest().unwrap();
        let mut state = RunState::new(collection_digest, "cfg".into());
        let record = PredictionRecord {
            format_version: FORMAT_VERSION,
            dataset_id: "a".into(),
            strategy_id: "Baseline".into(),
            predicted_labels: vec![0.0; 5],
            training_time: 0.01,
            tuning_report: TuningReport::untuned(),
        };
        let digest = c.save_prediction(&record).unwrap();
        state.completed.push(CompletedPair {
            dataset_id: "a".into(),
            strategy_id: "Baseline".into(),
            prediction_digest: digest,
        });
        c.checkpoint_write(&state).unwrap();
        let read = c.checkpoint_read("cfg").unwrap();
        assert_eq!(read, state);

        // Simulated crash mid-write: stray temp file must not be observed.
        fs::write(c.checkpoint_path().with_extension("tmp"), b"garbage").unwrap();
        let read = c.checkpoint_read("cfg").unwrap();
        assert_eq!(read, state);
    }

    #[test]
    fn checkpoint_digest_mismatches() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let d = tiny_dataset("a", 10);
        c.save_dataset(&d).unwrap();
        let state = RunState::new(c.collection_digest().unwrap(), "cfg".into());
        c.checkpoint_write(&state).unwrap();
        // Config changed.
        assert!(matches!(
            c.checkpoint_read("other-cfg").unwrap_err(),
            DataError::DigestMismatch { .. }
        ));
        // Dataset file modified after checkpoint.
        let csv = dir.path().join("datasets/a.csv");
        let mut contents = fs::read_to_string(&csv).unwrap();
        contents.push_str("9,9,1\n");
        fs::write(&csv, contents).unwrap();
        assert!(matches!(
            c.checkpoint_read("cfg").unwrap_err(),
            DataError::DigestMismatch { .. }
        ));
    }

    #[test]
    fn checkpoint_corrupt_file() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        fs::write(c.checkpoint_path(), b"{not json").unwrap();
        assert!(matches!(
            c.checkpoint_read("cfg").unwrap_err(),
            DataError::CorruptCheckpoint(_)
        ));
    }

    #[test]
    fn checkpoint_validates_prediction_digests() {
        let dir = tempfile::tempdir().unwrap();
        let c = Collection::open(dir.path()).unwrap();
        let mut state = RunState::new(c.collection_digest().unwrap(), "cfg".into());
        state.completed.push(CompletedPair {
            dataset_id: "a".into(),
            strategy_id: "Baseline".into(),
            prediction_digest: "deadbeef".into(),
        });
        c.checkpoint_write(&state).unwrap();
        assert!(matches!(
            c.checkpoint_read("cfg").unwrap_err(),
            DataError::CorruptCheckpoint(_)
        ));
    }
}
