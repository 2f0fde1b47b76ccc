//! Append-only enrollment log.
//!
//! Every accepted burst becomes one JSON line in `records.jsonl`, synced to
//! disk before it is acknowledged. Reopening the directory replays the log; a
//! torn final line left by a crash is cut off.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wfid::dataset::{DatasetKind, NUM_TABULAR_ATTRIBUTES};
use wfid::{CsiTrace, LabeledDataset, TabularFingerprint};

use crate::error::{Result, ServiceError};
use crate::wire::{DeviceCount, FingerprintBurst, IngestAck, WireRecord};

pub const LOG_FILE: &str = "records.jsonl";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct LogEntry {
    offset: u64,
    source: String,
    timestamp: u64,
    hash: String,
    kind: DatasetKind,
    records: Vec<WireRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoredRecord {
    pub kind: DatasetKind,
    pub device_id: usize,
    pub location_id: usize,
    pub values: Vec<f64>,
}

type BurstKey = (String, u64, String);

pub struct Store {
    path: PathBuf,
    log: File,
    records: Vec<StoredRecord>,
    keys: HashSet<BurstKey>,
    trace_length: Option<usize>,
}

fn content_hash(kind: DatasetKind, records: &[WireRecord]) -> String {
    let bytes = serde_json::to_vec(&(kind, records)).expect("records serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn invalid(i: usize, msg: impl std::fmt::Display) -> ServiceError {
    ServiceError::Invalid(format!("records[{i}].values: {msg}"))
}

impl Store {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let mut store = Self {
            log: OpenOptions::new().create(true).append(true).open(&path)?,
            path,
            records: Vec::new(),
            keys: HashSet::new(),
            trace_length: None,
        };
        store.replay()?;
        Ok(store)
    }

    fn replay(&mut self) -> Result<()> {
        let mut reader = BufReader::new(File::open(&self.path)?);
        let mut good = 0u64;
        let mut line = String::new();
        loop {
            line.clear();
            let n = reader.read_line(&mut line)?;
            if n == 0 {
                break;
            }
            let complete = line.ends_with('\n');
            match serde_json::from_str::<LogEntry>(line.trim_end()) {
                Ok(entry) if complete => {
                    if entry.offset != self.records.len() as u64 {
                        return Err(ServiceError::Corrupt(format!(
                            "entry at byte {good} starts at offset {}, expected {}",
                            entry.offset,
                            self.records.len()
                        )));
                    }
                    self.apply(entry);
                    good += n as u64;
                }
                _ => {
                    let mut rest = String::new();
                    reader.read_line(&mut rest)?;
                    if !rest.is_empty() {
                        return Err(ServiceError::Corrupt(format!("unreadable entry at byte {good}")));
                    }
                    // Torn tail from an interrupted append.
                    let file = OpenOptions::new().write(true).open(&self.path)?;
                    file.set_len(good)?;
                    file.sync_all()?;
                    break;
                }
            }
        }
        Ok(())
    }

    fn apply(&mut self, entry: LogEntry) {
        if entry.kind == DatasetKind::Sequence {
            if let Some(r) = entry.records.first() {
                self.trace_length.get_or_insert(r.values.len());
            }
        }
        for r in &entry.records {
            self.records.push(StoredRecord {
                kind: entry.kind,
                device_id: r.device_id.unwrap_or_default(),
                location_id: r.location_id.unwrap_or(r.device_id.unwrap_or_default()),
                values: r.values.clone(),
            });
        }
        self.keys.insert((entry.source, entry.timestamp, entry.hash));
    }

    /// Checks a burst against the store schema without mutating anything.
    pub fn validate(&self, burst: &FingerprintBurst) -> Result<()> {
        if burst.records.is_empty() {
            return Err(ServiceError::Invalid("burst has no records".into()));
        }
        let expected = match burst.kind {
            DatasetKind::Tabular => NUM_TABULAR_ATTRIBUTES,
            DatasetKind::Sequence => self.trace_length.unwrap_or(burst.records[0].values.len()),
        };
        for (i, r) in burst.records.iter().enumerate() {
            let Some(device) = r.device_id else {
                return Err(ServiceError::Invalid(format!("records[{i}].device_id: enrollment records need a label")));
            };
            if r.values.len() != expected {
                return Err(invalid(i, format!("expected {expected} values, found {}", r.values.len())));
            }
            match burst.kind {
                DatasetKind::Tabular => {
                    if r.location_id.is_some() {
                        return Err(ServiceError::Invalid(format!(
                            "records[{i}].location_id: tabular records have no location"
                        )));
                    }
                    let values: [f64; NUM_TABULAR_ATTRIBUTES] = r.values.as_slice().try_into().expect("arity checked");
                    TabularFingerprint::new(values, device).map_err(|e| invalid(i, e))?;
                }
                DatasetKind::Sequence => {
                    CsiTrace::new(r.values.clone(), device, r.location_id.unwrap_or(device)).map_err(|e| invalid(i, e))?;
                }
            }
        }
        Ok(())
    }

    /// Appends a burst, or acknowledges it as a duplicate of an earlier one with
    /// the same source, timestamp and content.
    pub fn ingest(&mut self, burst: FingerprintBurst) -> Result<IngestAck> {
        self.validate(&burst)?;
        let hash = content_hash(burst.kind, &burst.records);
        let key = (burst.source.clone(), burst.timestamp, hash.clone());
        if self.keys.contains(&key) {
            return Ok(IngestAck {
                accepted: 0,
                offset: self.offset(),
                duplicate: true,
            });
        }
        let entry = LogEntry {
            offset: self.offset(),
            source: burst.source,
            timestamp: burst.timestamp,
            hash,
            kind: burst.kind,
            records: burst.records,
        };
        let mut line = serde_json::to_vec(&entry).expect("entry serializes");
        line.push(b'\n');
        self.log.write_all(&line)?;
        self.log.sync_data()?;
        let accepted = entry.records.len();
        self.apply(entry);
        Ok(IngestAck {
            accepted,
            offset: self.offset(),
            duplicate: false,
        })
    }

    /// Number of records stored.
    pub fn offset(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn records(&self) -> &[StoredRecord] {
        &self.records
    }

    pub fn trace_length(&self) -> Option<usize> {
        self.trace_length
    }

    pub fn device_counts(&self) -> Vec<DeviceCount> {
        let mut counts: BTreeMap<(u8, usize), usize> = BTreeMap::new();
        for r in &self.records {
            let k = match r.kind {
                DatasetKind::Tabular => 0,
                DatasetKind::Sequence => 1,
            };
            *counts.entry((k, r.device_id)).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|((k, device_id), count)| DeviceCount {
                kind: if k == 0 { DatasetKind::Tabular } else { DatasetKind::Sequence },
                device_id,
                count,
            })
            .collect()
    }

    /// Labeled dataset of every stored record of `kind`, with the offset it reflects.
    pub fn snapshot(&self, kind: DatasetKind) -> Result<(LabeledDataset, u64)> {
        let rows: Vec<&StoredRecord> = self.records.iter().filter(|r| r.kind == kind).collect();
        let num_devices = rows.iter().map(|r| r.device_id + 1).max().unwrap_or(0);
        let dataset = match kind {
            DatasetKind::Tabular => {
                let records = rows
                    .iter()
                    .map(|r| TabularFingerprint::new(r.values.as_slice().try_into().expect("validated arity"), r.device_id))
                    .collect::<wfid::Result<Vec<_>>>()?;
                LabeledDataset::tabular(records, num_devices)?
            }
            DatasetKind::Sequence => {
                let records = rows
                    .iter()
                    .map(|r| CsiTrace::new(r.values.clone(), r.device_id, r.location_id))
                    .collect::<wfid::Result<Vec<_>>>()?;
                LabeledDataset::sequence(records, num_devices, self.trace_length.unwrap_or(1))?
            }
        };
        Ok((dataset, self.offset()))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.log.sync_all()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burst(source: &str, ts: u64, rows: &[(usize, f64)]) -> FingerprintBurst {
        FingerprintBurst {
            source: source.into(),
            kind: DatasetKind::Tabular,
            timestamp: ts,
            records: rows
                .iter()
                .map(|&(d, v)| WireRecord {
                    device_id: Some(d),
                    location_id: None,
                    values: vec![v, v + 1.0, -10.0, 3.0, 12.0],
                })
                .collect(),
        }
    }

    #[test]
    fn offsets_advance_and_retries_are_absorbed() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let a = store.ingest(burst("m1", 10, &[(0, -100.0), (1, -90.0), (0, -101.0)])).unwrap();
        assert_eq!((a.accepted, a.offset, a.duplicate), (3, 3, false));
        let again = store.ingest(burst("m1", 10, &[(0, -100.0), (1, -90.0), (0, -101.0)])).unwrap();
        assert_eq!((again.accepted, again.offset, again.duplicate), (0, 3, true));
        let b = store.ingest(burst("m1", 11, &[(2, -80.0)])).unwrap();
        assert_eq!(b.offset, 4);
    }

    #[test]
    fn reopen_replays_and_cuts_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut store = Store::open(dir.path()).unwrap();
            store.ingest(burst("m", 1, &[(0, -100.0), (1, -90.0)])).unwrap();
            store.ingest(burst("m", 2, &[(1, -91.0)])).unwrap();
        }
        let path = dir.path().join(LOG_FILE);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"offset\":3,\"sour").unwrap();
        drop(f);
        let mut store = Store::open(dir.path()).unwrap();
        assert_eq!(store.offset(), 3);
        assert_eq!(store.device_counts().iter().map(|d| d.count).collect::<Vec<_>>(), vec![1, 2]);
        assert!(store.ingest(burst("m", 2, &[(1, -91.0)])).unwrap().duplicate);
        assert_eq!(store.ingest(burst("m", 3, &[(0, -99.0)])).unwrap().offset, 4);
        drop(store);
        assert_eq!(Store::open(dir.path()).unwrap().offset(), 4);
    }

    #[test]
    fn schema_violations_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let mut b = burst("m", 1, &[(0, -100.0)]);
        b.records[0].values.pop();
        let err = store.ingest(b).unwrap_err().to_string();
        assert!(err.contains("records[0].values"), "{err}");

        let mut b = burst("m", 1, &[(0, -100.0)]);
        b.records[0].device_id = None;
        assert!(store.ingest(b).is_err());

        let trace = |len: usize| WireRecord {
            device_id: Some(0),
            location_id: Some(0),
            values: vec![1.0; len],
        };
        let mixed = FingerprintBurst {
            source: "esp".into(),
            kind: DatasetKind::Sequence,
            timestamp: 5,
            records: vec![trace(52), trace(64)],
        };
        let err = store.ingest(mixed).unwrap_err().to_string();
        assert!(err.contains("records[1].values"), "{err}");
        assert_eq!(store.offset(), 0);
    }
}
