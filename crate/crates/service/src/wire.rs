//! Request and response bodies.

use serde::{Deserialize, Serialize};
use wfid::dataset::DatasetKind;
use wfid::eval::{MetricSummary, Protocol, SearchBudget};
use wfid::{Algorithm, Hyperparameters};

/// One fingerprint on the wire. `values` holds the five radio metrics of a
/// tabular record or the amplitudes of a CSI trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device_id: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location_id: Option<usize>,
    pub values: Vec<f64>,
}

/// A batch of enrollment records forwarded by one fingerprinting module.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintBurst {
    /// Transport identity of the sender; never used as a feature.
    pub source: String,
    pub kind: DatasetKind,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub records: Vec<WireRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestAck {
    pub accepted: usize,
    /// Number of records in the store after this burst.
    pub offset: u64,
    pub duplicate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceCount {
    pub kind: DatasetKind,
    pub device_id: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceSummary {
    pub devices: Vec<DeviceCount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRequest {
    pub kind: DatasetKind,
    /// Algorithm name; validated before the job is accepted.
    pub algorithm: String,
    pub protocol: Protocol,
    #[serde(default)]
    pub budget: Option<SearchBudget>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainAccepted {
    pub model_id: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelStatus {
    Training,
    Ready,
    Failed,
}

/// Offline evaluation figures of a registered model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub protocol: Protocol,
    pub seed: u64,
    pub accuracy: MetricSummary,
    pub f_measure: MetricSummary,
    pub throughput: Option<MetricSummary>,
    pub memory_artifact_mb: Option<MetricSummary>,
    pub memory_resident_mb: Option<MetricSummary>,
    pub zero_support_f: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub model_id: String,
    pub status: ModelStatus,
    pub kind: DatasetKind,
    pub algorithm: Algorithm,
    pub protocol: Protocol,
    pub seed: u64,
    /// `<kind>@<offset>`: the labeled records of `kind` among the first `offset` in the store.
    pub snapshot_id: String,
    pub snapshot_records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperparameters: Option<Hyperparameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ModelMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyRequest {
    pub records: Vec<WireRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub device_id: usize,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentifyResponse {
    pub model_id: String,
    pub results: Vec<Identification>,
}
