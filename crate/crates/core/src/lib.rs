//! Wireless-fingerprint device identification.
//!
//! Datasets of radio-metric fingerprints and CSI amplitude traces, synthetic
//! generators for both, the classifier roster used to identify devices from
//! them, and an evaluation harness measuring accuracy, F-measure, prediction
//! throughput and model size.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod hyper;
pub mod io;
mod matrix;
pub mod model;
pub mod rng;
pub mod seqclf;
pub mod simgen;
pub mod split;
pub mod standardize;
pub mod tabular;

pub use dataset::{CsiTrace, DatasetKind, LabeledDataset, Records, TabularFingerprint, TABULAR_ATTRIBUTES};
pub use error::{Error, Result};
pub use split::{stratified_holdout, stratified_kfold, SplitPlan};
pub use standardize::StandardizationParams;
pub use eval::{EvalEntry, Protocol, SearchBudget};
pub use hyper::{Algorithm, HyperValue, HyperparameterSpace, Hyperparameters};
pub use model::{fit, ModelParams, TrainedModel};
pub use simgen::{CsiScenario, NbIotScenario, Scenario};
