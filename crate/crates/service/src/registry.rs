//! Model registry and training jobs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use wfid::eval::{evaluate, EvalEntry, Protocol, SearchBudget};
use wfid::rng::derive_seed;
use wfid::{fit, Algorithm, LabeledDataset, TrainedModel};

use crate::error::{Result, ServiceError};
use crate::wire::{ModelEntry, ModelMetrics, ModelStatus};

pub const MODELS_DIR: &str = "models";
pub const SNAPSHOTS_DIR: &str = "snapshots";

/// Registry entries persisted as `models/<id>.json`, ready artifacts as `models/<id>.model`.
pub struct Registry {
    dir: PathBuf,
    entries: BTreeMap<String, ModelEntry>,
    models: BTreeMap<String, Arc<TrainedModel>>,
    next: u64,
}

impl Registry {
    /// Loads every persisted entry. Jobs that were still training when the
    /// service stopped are marked failed.
    pub fn open(store_dir: impl AsRef<Path>) -> Result<Self> {
        let dir = store_dir.as_ref().join(MODELS_DIR);
        std::fs::create_dir_all(&dir)?;
        std::fs::create_dir_all(store_dir.as_ref().join(SNAPSHOTS_DIR))?;
        let mut reg = Self {
            dir,
            entries: BTreeMap::new(),
            models: BTreeMap::new(),
            next: 1,
        };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&reg.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            let mut entry: ModelEntry = serde_json::from_str(&text)
                .map_err(|e| ServiceError::Corrupt(format!("{}: {e}", path.display())))?;
            if let Some(n) = entry.model_id.strip_prefix('m').and_then(|n| n.parse::<u64>().ok()) {
                reg.next = reg.next.max(n + 1);
            }
            match entry.status {
                ModelStatus::Training => {
                    entry.status = ModelStatus::Failed;
                    entry.reason = Some("interrupted by a service restart".into());
                    reg.persist(&entry)?;
                }
                ModelStatus::Ready => {
                    let model = TrainedModel::load(reg.artifact_path(&entry.model_id))?;
                    reg.models.insert(entry.model_id.clone(), Arc::new(model));
                }
                ModelStatus::Failed => {}
            }
            reg.entries.insert(entry.model_id.clone(), entry);
        }
        Ok(reg)
    }

    fn artifact_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.model"))
    }

    fn persist(&self, entry: &ModelEntry) -> Result<()> {
        let path = self.dir.join(format!("{}.json", entry.model_id));
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_vec_pretty(entry).expect("entry serializes"))?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn next_id(&mut self) -> String {
        let id = format!("m{:06}", self.next);
        self.next += 1;
        id
    }

    pub fn insert(&mut self, entry: ModelEntry) -> Result<()> {
        self.persist(&entry)?;
        self.entries.insert(entry.model_id.clone(), entry);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&ModelEntry> {
        self.entries.get(id).ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    /// The fitted model of a ready entry.
    pub fn model(&self, id: &str) -> Result<Arc<TrainedModel>> {
        let entry = self.get(id)?;
        match entry.status {
            ModelStatus::Ready => Ok(self.models[id].clone()),
            ModelStatus::Training => Err(ServiceError::Unavailable {
                id: id.to_string(),
                reason: "training in progress".into(),
            }),
            ModelStatus::Failed => Err(ServiceError::Unavailable {
                id: id.to_string(),
                reason: entry.reason.clone().unwrap_or_else(|| "training failed".into()),
            }),
        }
    }

    pub fn complete(&mut self, id: &str, outcome: Result<(TrainedModel, EvalEntry)>) -> Result<()> {
        let mut entry = self.get(id)?.clone();
        match outcome {
            Ok((model, eval)) => {
                model.save(self.artifact_path(id))?;
                entry.status = ModelStatus::Ready;
                entry.hyperparameters = Some(model.hyperparameters.clone());
                entry.metrics = Some(metrics(&eval));
                self.models.insert(id.to_string(), Arc::new(model));
            }
            Err(e) => {
                entry.status = ModelStatus::Failed;
                entry.reason = Some(e.to_string());
            }
        }
        self.insert(entry)
    }
}

fn metrics(e: &EvalEntry) -> ModelMetrics {
    ModelMetrics {
        protocol: e.protocol,
        seed: e.seed,
        accuracy: e.accuracy.clone(),
        f_measure: e.f_measure.clone(),
        throughput: e.throughput.clone(),
        memory_artifact_mb: e.memory_artifact_mb.clone(),
        memory_resident_mb: e.memory_resident_mb.clone(),
        zero_support_f: e.zero_support_f,
    }
}

/// Evaluates `algorithm` on the snapshot, then fits the deployed model on the
/// whole snapshot with the configuration chosen most often across rounds.
pub fn train(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    protocol: Protocol,
    budget: &SearchBudget,
    seed: u64,
) -> Result<(TrainedModel, EvalEntry)> {
    let present = dataset.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(ServiceError::Invalid(format!(
            "the snapshot holds {present} labeled device(s); at least 2 are required"
        )));
    }
    let eval = evaluate(algorithm, dataset, protocol, None, budget, seed)?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    let model = fit(
        algorithm,
        dataset,
        &all,
        &eval.consensus_hyperparameters(),
        derive_seed(seed, &[4]),
    )?;
    Ok((model, eval))
}
