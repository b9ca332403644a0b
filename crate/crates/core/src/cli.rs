//! The `bench` command line: ingest -> split -> run -> evaluate -> compare
//! -> report, plus a synthetic-collection generator and resume status.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error. Diagnostics go to
//! standard error; machine output goes to files (and tables to standard
//! out).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::comparison::{Alternative, Correction, PairwiseTest};
use crate::datastore::{self, CategoricalEncoding, Collection, IngestMeta};
use crate::learners::{self, Grid, RegistryFilter};
use crate::metrics::{AggregateScore, LossKind, PointwiseLoss};
use crate::orchestrator::{self, RunConfig, SynthSpec};
use crate::report::{self, EvalContext, ExportOptions};
use crate::rng;

const TERM_WIDTH: usize = 100;

#[derive(Parser, Debug)]
#[command(
    name = "bench",
    version,
    about = "Benchmark supervised learning strategies across dataset collections and compare them statistically",
    term_width = TERM_WIDTH
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic collection of Gaussian-blob classification datasets
    Synth(SynthArgs),
    /// Ingest a CSV dataset into a collection
    Ingest(IngestArgs),
    /// Generate deterministic train/test splits for every dataset
    Split(SplitArgs),
    /// Run every (dataset, strategy) pair, resuming from the checkpoint
    Run(RunArgs),
    /// Compute performance estimates with confidence intervals
    Evaluate(EvaluateArgs),
    /// Run comparison hypothesis tests between strategies
    Compare(CompareArgs),
    /// Export the full report set (summary, diagrams, CSVs)
    Report(ReportArgs),
    /// Show checkpoint progress for a collection
    ResumeStatus(StatusArgs),
}

#[derive(Args, Debug)]
struct CollectionArg {
    /// Collection directory
    #[arg(long, env = "BENCH_COLLECTION", value_name = "DIR")]
    collection: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    collection: CollectionArg,
    /// Number of datasets to generate
    #[arg(long, default_value_t = 5)]
    datasets: usize,
    /// Points per dataset
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Feature count
    #[arg(long, default_value_t = 2)]
    features: usize,
    /// Distance between class centers, in within-class standard deviations
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    /// Generation seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    collection: CollectionArg,
    /// CSV file to ingest (header row required)
    #[arg(long, value_name = "FILE")]
    csv: PathBuf,
    /// Name of the label column
    #[arg(long, value_name = "COLUMN")]
    target: String,
    /// Dataset id (defaults to the CSV file stem)
    #[arg(long)]
    id: Option<String>,
    /// human-readable dataset name (defaults to the id)
    #[arg(long)]
    name: Option<String>,
    /// Data source tag
    #[arg(long, default_value = "local")]
    source: String,
    /// Encoding for non-numeric feature columns
    #[arg(long, value_parser = ["integer", "onehot"], default_value = "integer")]
    categorical: String,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[command(flatten)]
    collection: CollectionArg,
    /// Training fraction
    #[arg(long, default_value_t = 2.0 / 3.0)]
    ratio: f64,
    /// Master seed; per-dataset split seeds derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    collection: CollectionArg,
    /// Comma-separated strategy ids, or "all"
    #[arg(long, default_value = "all")]
    strategies: String,
    /// Training fraction
    #[arg(long, default_value_t = 2.0 / 3.0)]
    ratio: f64,
    /// Master seed; per-job seeds derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Concurrent jobs
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Standardize each dataset once before splitting (instead of per fit)
    #[arg(long)]
    paper_standardize: bool,
    /// JSON file with tuning-grid overrides keyed by strategy id
    #[arg(long, value_name = "FILE")]
    grids: Option<PathBuf>,
    /// Cross-validation folds for tuning
    #[arg(long, default_value_t = 5)]
    folds: usize,
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Pointwise loss: mmce, squared, absolute or q:ALPHA
    #[arg(long, default_value = "mmce", conflicts_with = "aggregate")]
    loss: String,
    /// Aggregate score instead of a pointwise loss: sens, spec, prec, f1 or rmse
    #[arg(long)]
    aggregate: Option<String>,
    /// Use the non-negative pinball sign convention for the q loss
    #[arg(long)]
    pinball_convention: bool,
    /// Use the unnormalized residual 2-norm for rmse
    #[arg(long)]
    paper_rmse: bool,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    collection: CollectionArg,
    #[command(flatten)]
    metric: MetricArgs,
    /// Comma-separated strategy ids, or "all"
    #[arg(long, default_value = "all")]
    strategies: String,
    /// Confidence level for intervals
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Output directory (defaults to <collection>/reports)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    collection: CollectionArg,
    #[command(flatten)]
    metric: MetricArgs,
    /// Comma-separated strategy ids, or "all"
    #[arg(long, default_value = "all")]
    strategies: String,
    /// Test to run: t, wilcoxon, sign or friedman
    #[arg(long, default_value = "t", value_parser = ["t", "wilcoxon", "sign", "friedman"])]
    test: String,
    /// Alternative hypothesis: two, less or greater
    #[arg(long, default_value = "two", value_parser = ["two", "less", "greater"])]
    alternative: String,
    /// Multiple-testing correction: none, bonferroni or holm
    #[arg(long, default_value = "holm", value_parser = ["none", "bonferroni", "holm"])]
    correction: String,
    /// Output directory (defaults to <collection>/reports)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    collection: CollectionArg,
    #[command(flatten)]
    metric: MetricArgs,
    /// Comma-separated strategy ids, or "all"
    #[arg(long, default_value = "all")]
    strategies: String,
    /// Confidence level for intervals
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Significance level for the critical-difference diagram (0.05 or 0.10)
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Alternative hypothesis for pairwise tests: two, less or greater
    #[arg(long, default_value = "two", value_parser = ["two", "less", "greater"])]
    alternative: String,
    /// Multiple-testing correction: none, bonferroni or holm
    #[arg(long, default_value = "holm", value_parser = ["none", "bonferroni", "holm"])]
    correction: String,
    /// Keep only the N best-ranked strategies in the diagram
    #[arg(long, value_name = "N")]
    top: Option<usize>,
    /// Output directory (defaults to <collection>/reports)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatusArgs {
    #[command(flatten)]
    collection: CollectionArg,
}

/// Parses argv and executes; returns the process exit code.
pub fn dispatch(args: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Rendered long help for the top command and every subcommand; used by the
/// golden-file test.
pub fn full_help_text() -> String {
    let mut cmd = Cli::command().term_width(TERM_WIDTH);
    let mut out = cmd.render_long_help().to_string();
    for sub in cmd.get_subcommands_mut() {
        out.push_str("\n================\n");
        out.push_str(&sub.render_long_help().to_string());
    }
    out
}

fn execute(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Synth(a) => {
            let spec = SynthSpec {
                n_datasets: a.datasets,
                n_per_dataset: a.points,
                n_features: a.features,
                class_separation: a.separation,
                seed: a.seed,
            };
            orchestrator::synth_collection(&spec, &a.collection.collection)?;
            eprintln!(
                "generated {} datasets under {}",
                a.datasets,
                a.collection.collection.display()
            );
            Ok(())
        }
        Command::Ingest(a) => {
            let id = a.id.unwrap_or_else(|| {
                a.csv
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into())
            });
            let meta = IngestMeta {
                id: id.clone(),
                name: a.name.unwrap_or_else(|| id.clone()),
                source: a.source,
                target_column: a.target,
            };
            let encoding = match a.categorical.as_str() {
                "onehot" => CategoricalEncoding::OneHot,
                _ => CategoricalEncoding::Integer,
            };
            let dataset = datastore::ingest_dataset(&a.csv, &meta, encoding)?;
            for col in &dataset.constant_columns {
                eprintln!("warning: feature column {col} is constant");
            }
            let collection = Collection::open(&a.collection.collection)?;
            collection.save_dataset(&dataset)?;
            eprintln!(
                "ingested {} ({} rows, {} features)",
                id,
                dataset.labels.len(),
                dataset.features.n_cols()
            );
            Ok(())
        }
        Command::Split(a) => {
            let collection = Collection::open(&a.collection.collection)?;
            for id in collection.dataset_ids()? {
                let dataset = collection.load_dataset(&id)?;
                let seed = rng::derive_seed(a.seed, &["split", &id]);
                let split = datastore::generate_split(&dataset, a.ratio, seed)?;
                collection.save_split(&split)?;
                eprintln!(
                    "split {} into {} train / {} test",
                    id,
                    split.train_indices.len(),
                    split.test_indices.len()
                );
            }
            Ok(())
        }
        Command::Run(a) => {
            let strategy_ids = resolve_strategies(&a.strategies)?;
            let grid_overrides: BTreeMap<String, Grid> = match a.grids {
                Some(path) => serde_json::from_slice(&fs::read(path)?)?,
                None => BTreeMap::new(),
            };
            let config = RunConfig {
                collection_dir: a.collection.collection,
                strategy_ids,
                split_ratio: a.ratio,
                master_seed: a.seed,
                parallelism: a.parallelism,
                paper_standardize: a.paper_standardize,
                grid_overrides,
                cv_folds: a.folds,
                job_limit: None,
            };
            let summary = orchestrator::run(&config)?;
            eprintln!(
                "completed {} jobs, skipped {}, failed {} in {:.2}s",
                summary.completed,
                summary.skipped,
                summary.failed.len(),
                summary.wall_time_secs
            );
            Ok(())
        }
        Command::Evaluate(a) => {
            let collection = Collection::open(&a.collection.collection)?;
            let strategy_ids = resolve_strategies(&a.strategies)?;
            let kind = parse_kind(&a.metric)?;
            let context = EvalContext::load(&collection, &strategy_ids)?;
            let tensor = context.tensor(kind)?;
            let estimates = report::estimates_csv(&tensor, a.confidence)?;
            let out_dir = a
                .out
                .unwrap_or_else(|| a.collection.collection.join("reports"));
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("estimates.csv"), &estimates)?;
            if matches!(kind, LossKind::Average(_)) {
                fs::write(
                    out_dir.join("estimates_per_dataset.csv"),
                    report::estimates_per_dataset_csv(&tensor, a.confidence)?,
                )?;
            }
            print!("{estimates}");
            Ok(())
        }
        Command::Compare(a) => {
            let collection = Collection::open(&a.collection.collection)?;
            let strategy_ids = resolve_strategies(&a.strategies)?;
            let kind = parse_kind(&a.metric)?;
            let context = EvalContext::load(&collection, &strategy_ids)?;
            let tensor = context.tensor(kind)?;
            let out_dir = a
                .out
                .unwrap_or_else(|| a.collection.collection.join("reports"));
            fs::create_dir_all(&out_dir)?;
            if a.test == "friedman" {
                let r = report::friedman_from_tensor(&tensor)?;
                println!(
                    "friedman: statistic {} p_value {} (Q = {}, concordance = {})",
                    r.statistic, r.p_value, r.effect_raw, r.effect_normalized
                );
                fs::write(
                    out_dir.join("friedman.csv"),
                    format!(
                        "statistic,p_value,effect_raw,effect_normalized,n_datasets,n_strategies\n{},{},{},{},{},{}\n",
                        r.statistic,
                        r.p_value,
                        r.effect_raw,
                        r.effect_normalized,
                        r.n_used,
                        tensor.strategy_ids.len()
                    ),
                )?;
            } else {
                let test = match a.test.as_str() {
                    "wilcoxon" => PairwiseTest::WilcoxonSignedRank,
                    "sign" => PairwiseTest::SignTest,
                    _ => PairwiseTest::PairedT,
                };
                let matrix = crate::comparison::all_pairs(
                    &tensor,
                    test,
                    parse_alternative(&a.alternative),
                    parse_correction(&a.correction),
                )?;
                let wide = report::pairwise_wide_csv(&matrix);
                fs::write(out_dir.join(format!("pairwise_{}.csv", a.test)), &wide)?;
                fs::write(
                    out_dir.join(format!("pairwise_{}_long.csv", a.test)),
                    report::pairwise_long_csv(&matrix),
                )?;
                print!("{wide}");
            }
            Ok(())
        }
        Command::Report(a) => {
            let collection = Collection::open(&a.collection.collection)?;
            let strategy_ids = resolve_strategies(&a.strategies)?;
            let kind = parse_kind(&a.metric)?;
            let context = EvalContext::load(&collection, &strategy_ids)?;
            let options = ExportOptions {
                kind,
                confidence: a.confidence,
                alternative: parse_alternative(&a.alternative),
                correction: parse_correction(&a.correction),
                alpha: a.alpha,
                top: a.top,
            };
            let out_dir = a
                .out
                .unwrap_or_else(|| a.collection.collection.join("reports"));
            let manifest = report::export_all(&context, &options, &out_dir)?;
            for f in &manifest.files {
                println!("{}", out_dir.join(&f.name).display());
            }
            for note in &manifest.notes {
                eprintln!("note: {note}");
            }
            Ok(())
        }
        Command::ResumeStatus(a) => {
            let collection = Collection::open(&a.collection.collection)?;
            let path = collection.checkpoint_path();
            if !path.exists() {
                println!("no checkpoint");
                return Ok(());
            }
            let state: datastore::RunState = serde_json::from_slice(&fs::read(path)?)?;
            let datasets = collection.dataset_ids()?.len();
            println!(
                "completed {} pairs, failed {} ({} datasets in collection)",
                state.completed.len(),
                state.failed.len(),
                datasets
            );
            for f in &state.failed {
                println!("failed: {} on {}: {}", f.strategy_id, f.dataset_id, f.error);
            }
            Ok(())
        }
    }
}

fn resolve_strategies(spec: &str) -> Result<Vec<String>, learners::LearnError> {
    if spec == "all" {
        return Ok(learners::registry().into_iter().map(|d| d.id).collect());
    }
    let ids: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).collect();
    learners::registry_lookup(&RegistryFilter {
        ids: Some(ids.clone()),
        ..Default::default()
    })?;
    Ok(ids)
}

fn parse_kind(metric: &MetricArgs) -> Result<LossKind, String> {
    if let Some(agg) = &metric.aggregate {
        let score = match agg.as_str() {
            "sens" => AggregateScore::Sensitivity,
            "spec" => AggregateScore::Specificity,
            "prec" => AggregateScore::Precision,
            "f1" => AggregateScore::F1,
            "rmse" => AggregateScore::Rmse {
                paper_form: metric.paper_rmse,
            },
            other => return Err(format!("unknown aggregate score {other}")),
        };
        return Ok(LossKind::Aggregate(score));
    }
    let loss = match metric.loss.as_str() {
        "mmce" => PointwiseLoss::Mmce,
        "squared" => PointwiseLoss::Squared,
        "absolute" => PointwiseLoss::Absolute,
        other => match other.strip_prefix("q:") {
            Some(alpha) => {
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| format!("cannot parse quantile level in {other}"))?;
                PointwiseLoss::Quantile {
                    alpha,
                    pinball_convention: metric.pinball_convention,
                }
            }
            None => return Err(format!("unknown loss {other}")),
        },
    };
    Ok(LossKind::Average(loss))
}

fn parse_alternative(s: &str) -> Alternative {
    match s {
        "less" => Alternative::Less,
        "greater" => Alternative::Greater,
        _ => Alternative::TwoSided,
    }
}

fn parse_correction(s: &str) -> Correction {
    match s {
        "none" => Correction::None,
        "bonferroni" => Correction::Bonferroni,
        _ => Correction::Holm,
    }
}
