//! Prediction throughput and model memory.
//!
//! Measurements take a process-wide lock so no two benchmarks overlap.

use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::stats::median;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::TrainedModel;

pub const DEFAULT_REPETITIONS: usize = 5;
const MIN_ELAPSED: Duration = Duration::from_micros(200);
const MEMORY_BATCH: usize = 1000;

static BENCH_LOCK: Mutex<()> = Mutex::new(());

/// Holds the benchmark lock; timing code elsewhere can take it to avoid overlap.
pub fn benchmark_lock() -> MutexGuard<'static, ()> {
    BENCH_LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    /// Median instances per second.
    pub ips: f64,
    pub runs: Vec<f64>,
    pub batch: usize,
}

fn timed_batch(model: &TrainedModel, dataset: &LabeledDataset, passes: usize) -> Result<Duration> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    let start = Instant::now();
    for _ in 0..passes {
        std::hint::black_box(model.predict_batch(dataset, &all)?);
    }
    Ok(start.elapsed())
}

/// Batch-predicts the whole dataset on the calling thread after one warm-up
/// pass and reports the median IPS of `repetitions` timed runs. Datasets too
/// small to time are repeated within each run.
pub fn measure_throughput(model: &TrainedModel, dataset: &LabeledDataset, repetitions: usize) -> Result<Throughput> {
    if dataset.is_empty() {
        return Err(Error::InvalidInput("throughput needs a non-empty dataset".into()));
    }
    let repetitions = repetitions.max(1);
    let _guard = benchmark_lock();
    let mut passes = 1;
    loop {
        let warm = timed_batch(model, dataset, passes)?;
        if warm >= MIN_ELAPSED {
            break;
        }
        passes *= 4;
    }
    let mut runs = Vec::with_capacity(repetitions);
    while runs.len() < repetitions {
        let elapsed = timed_batch(model, dataset, passes)?;
        if elapsed.is_zero() {
            passes *= 4;
            runs.clear();
            continue;
        }
        runs.push((dataset.len() * passes) as f64 / elapsed.as_secs_f64());
    }
    Ok(Throughput {
        ips: median(&runs),
        runs,
        batch: dataset.len() * passes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryUsage {
    pub artifact_bytes: usize,
    /// Resident-set growth while loading the artifact and predicting one batch.
    pub resident_bytes: usize,
}

impl MemoryUsage {
    pub fn artifact_mb(&self) -> f64 {
        self.artifact_bytes as f64 / 1e6
    }

    pub fn resident_mb(&self) -> f64 {
        self.resident_bytes as f64 / 1e6
    }
}

/// Current resident set size from `/proc/self/status`, if available.
pub fn resident_set_bytes() -> Option<usize> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    let kb: usize = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Serialized size of `model`, plus resident growth when a fresh copy is
/// loaded from that artifact and predicts up to 1000 records of `dataset`.
pub fn measure_model_memory(model: &TrainedModel, dataset: &LabeledDataset) -> Result<MemoryUsage> {
    let bytes = model.to_bytes()?;
    let _guard = benchmark_lock();
    let before = resident_set_bytes().unwrap_or(0);
    let loaded = TrainedModel::from_bytes(&bytes)?;
    let batch: Vec<usize> = (0..dataset.len().min(MEMORY_BATCH)).collect();
    std::hint::black_box(loaded.predict_batch(dataset, &batch)?);
    let after = resident_set_bytes().unwrap_or(0);
    drop(loaded);
    Ok(MemoryUsage {
        artifact_bytes: bytes.len(),
        resident_bytes: after.saturating_sub(before),
    })
}
