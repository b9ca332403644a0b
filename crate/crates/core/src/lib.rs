//! Benchmarking of supervised learning strategies across collections of
//! datasets, with statistical evaluation of the results.
//!
//! The crate is organized around the stages of a benchmarking study:
//!
//! - [`datastore`]: dataset ingestion, deterministic train/test splits and
//!   the on-disk collection layout (CSV + JSON, resumable checkpoints).
//! - [`learners`]: built-in prediction strategies with a uniform fit/predict
//!   contract, feature standardization and grid-search cross-validation.
//! - [`orchestrator`]: runs every (dataset, strategy) pair with per-pair
//!   seeding, records predictions and checkpoints after each pair.
//! - [`metrics`]: pointwise losses and aggregate scores over predictions.
//! - [`estimation`]: expected-loss and rank estimators with standard errors
//!   and normal-approximation confidence intervals.
//! - [`comparison`]: paired hypothesis tests between strategies with effect
//!   sizes and multiple-testing corrections.
//! - [`report`]: summary tables, critical-difference diagrams and CSV
//!   exports.
//! - [`cli`]: the `bench` command-line entry point.

pub mod cli;
pub mod comparison;
pub mod datastore;
pub mod estimation;
pub mod learners;
pub mod matrix;
pub mod metrics;
pub mod orchestrator;
pub mod report;
pub mod rng;
pub mod special;

pub use matrix::Matrix;
