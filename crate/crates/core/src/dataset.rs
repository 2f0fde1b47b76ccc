//! Fingerprint records and the labeled dataset container.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute names of a tabular fingerprint, in storage order.
pub const TABULAR_ATTRIBUTES: [&str; 5] = [
    "signal_power",
    "total_power",
    "rsrq",
    "snr",
    "energy_last_packet",
];

pub const NUM_TABULAR_ATTRIBUTES: usize = TABULAR_ATTRIBUTES.len();

/// Index of `signal_power` (RSRP role) within a tabular fingerprint.
pub const SIGNAL_POWER: usize = 0;
/// Index of `total_power` (RSSI role).
pub const TOTAL_POWER: usize = 1;
pub const RSRQ: usize = 2;
pub const SNR: usize = 3;
pub const ENERGY_LAST_PACKET: usize = 4;

/// One packet-averaged radio-metric vector with its device label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularFingerprint {
    values: [f64; NUM_TABULAR_ATTRIBUTES],
    pub device_id: usize,
}

impl TabularFingerprint {
    pub fn new(values: [f64; NUM_TABULAR_ATTRIBUTES], device_id: usize) -> Result<Self> {
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "attribute {} is not finite",
                TABULAR_ATTRIBUTES[j]
            )));
        }
        Ok(Self { values, device_id })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn signal_power(&self) -> f64 {
        self.values[SIGNAL_POWER]
    }

    pub fn total_power(&self) -> f64 {
        self.values[TOTAL_POWER]
    }

    pub fn rsrq(&self) -> f64 {
        self.values[RSRQ]
    }

    pub fn snr(&self) -> f64 {
        self.values[SNR]
    }

    pub fn energy_last_packet(&self) -> f64 {
        self.values[ENERGY_LAST_PACKET]
    }
}

/// One packet's per-subcarrier CSI amplitude sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsiTrace {
    amplitudes: Vec<f64>,
    pub device_id: usize,
    pub location_id: usize,
}

impl CsiTrace {
    pub fn new(amplitudes: Vec<f64>, device_id: usize, location_id: usize) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("empty amplitude trace".into()));
        }
        if let Some(k) = amplitudes.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidInput(format!(
                "amplitude {k} must be finite and non-negative, got {}",
                amplitudes[k]
            )));
        }
        Ok(Self {
            amplitudes,
            device_id,
            location_id,
        })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Tabular,
    Sequence,
}

impl std::fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DatasetKind::Tabular => "tabular",
            DatasetKind::Sequence => "sequence",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "records", rename_all = "snake_case")]
pub enum Records {
    Tabular(Vec<TabularFingerprint>),
    Sequence(Vec<CsiTrace>),
}

/// Homogeneous collection of labeled fingerprints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    records: Records,
    num_devices: usize,
    trace_length: usize,
}

impl LabeledDataset {
    /// Builds a tabular dataset. `num_devices` must exceed every device id.
    pub fn tabular(records: Vec<TabularFingerprint>, num_devices: usize) -> Result<Self> {
        check_labels(records.iter().map(|r| r.device_id), num_devices)?;
        Ok(Self {
            records: Records::Tabular(records),
            num_devices,
            trace_length: NUM_TABULAR_ATTRIBUTES,
        })
    }

    /// Builds a sequence dataset whose traces all have `trace_length` amplitudes.
    pub fn sequence(records: Vec<CsiTrace>, num_devices: usize, trace_length: usize) -> Result<Self> {
        if trace_length == 0 {
            return Err(Error::InvalidInput("trace length must be positive".into()));
        }
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.len() != trace_length) {
            return Err(Error::InvalidInput(format!(
                "trace {i} has length {}, expected {trace_length}",
                r.len()
            )));
        }
        check_labels(records.iter().map(|r| r.device_id), num_devices)?;
        Ok(Self {
            records: Records::Sequence(records),
            num_devices,
            trace_length,
        })
    }

    pub fn kind(&self) -> DatasetKind {
        match self.records {
            Records::Tabular(_) => DatasetKind::Tabular,
            Records::Sequence(_) => DatasetKind::Sequence,
        }
    }

    pub fn records(&self) -> &Records {
        &self.records
    }

    pub fn tabular_records(&self) -> Option<&[TabularFingerprint]> {
        match &self.records {
            Records::Tabular(r) => Some(r),
            Records::Sequence(_) => None,
        }
    }

    pub fn sequence_records(&self) -> Option<&[CsiTrace]> {
        match &self.records {
            Records::Sequence(r) => Some(r),
            Records::Tabular(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.records {
            Records::Tabular(r) => r.len(),
            Records::Sequence(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_devices(&self) -> usize {
        self.num_devices
    }

    /// Number of numeric attributes per record (5 for tabular, trace length for sequences).
    pub fn num_attributes(&self) -> usize {
        self.trace_length
    }

    /// Trace length for sequence datasets.
    pub fn trace_length(&self) -> Option<usize> {
        match self.kind() {
            DatasetKind::Sequence => Some(self.trace_length),
            DatasetKind::Tabular => None,
        }
    }

    /// Attribute labels; sequence positions are named `a0..a{L-1}`.
    pub fn attribute_names(&self) -> Vec<String> {
        match self.kind() {
            DatasetKind::Tabular => TABULAR_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
            DatasetKind::Sequence => (0..self.trace_length).map(|k| format!("a{k}")).collect(),
        }
    }

    pub fn features(&self, i: usize) -> &[f64] {
        match &self.records {
            Records::Tabular(r) => r[i].values(),
            Records::Sequence(r) => r[i].amplitudes(),
        }
    }

    pub fn label(&self, i: usize) -> usize {
        match &self.records {
            Records::Tabular(r) => r[i].device_id,
            Records::Sequence(r) => r[i].device_id,
        }
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    /// Per-device record counts, length `num_devices`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_devices];
        for i in 0..self.len() {
            counts[self.label(i)] += 1;
        }
        counts
    }

    /// Dataset holding the records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let records = match &self.records {
            Records::Tabular(r) => Records::Tabular(indices.iter().map(|&i| r[i].clone()).collect()),
            Records::Sequence(r) => Records::Sequence(indices.iter().map(|&i| r[i].clone()).collect()),
        };
        LabeledDataset {
            records,
            num_devices: self.num_devices,
            trace_length: self.trace_length,
        }
    }

    pub(crate) fn require_kind(&self, kind: DatasetKind) -> Result<()> {
        if self.kind() != kind {
            return Err(Error::KindMismatch(format!(
                "expected a {kind} dataset, got {}",
                self.kind()
            )));
        }
        Ok(())
    }
}

fn check_labels(labels: impl Iterator<Item = usize>, num_devices: usize) -> Result<()> {
    for (i, label) in labels.enumerate() {
        if label >= num_devices {
            return Err(Error::InvalidInput(format!(
                "record {i} has device_id {label}, but the dataset declares {num_devices} devices"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_attributes() {
        assert!(TabularFingerprint::new([0.0, f64::NAN, 0.0, 0.0, 0.0], 0).is_err());
        assert!(TabularFingerprint::new([0.0, 0.0, f64::INFINITY, 0.0, 0.0], 0).is_err());
    }

    #[test]
    fn rejects_negative_amplitudes() {
        assert!(CsiTrace::new(vec![1.0, -0.1], 0, 0).is_err());
        assert!(CsiTrace::new(vec![1.0, 0.0], 0, 0).is_ok());
    }

    #[test]
    fn labels_must_fit_device_count() {
        let r = TabularFingerprint::new([0.0; 5], 3).unwrap();
        assert!(LabeledDataset::tabular(vec![r.clone()], 3).is_err());
        assert!(LabeledDataset::tabular(vec![r], 4).is_ok());
    }

    #[test]
    fn sequence_lengths_must_agree() {
        let a = CsiTrace::new(vec![1.0; 4], 0, 0).unwrap();
        let b = CsiTrace::new(vec![1.0; 5], 1, 1).unwrap();
        assert!(LabeledDataset::sequence(vec![a, b], 2, 4).is_err());
    }
}
