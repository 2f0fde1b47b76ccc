//! Nested cross-validation and repeated hold-out with random hyperparameter search.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bench::{measure_model_memory, measure_throughput, DEFAULT_REPETITIONS};
use super::metrics::{accuracy, macro_f1_detailed};
use super::stats::MetricSummary;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hyper::{Algorithm, HyperparameterSpace, Hyperparameters};
use crate::model::{fit, TrainedModel};
use crate::rng::{derive_seed, stream};
use crate::split::{stratified_holdout, stratified_kfold, stratified_kfold_subset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    NestedCv,
    Holdout,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::NestedCv => "nested_cv",
            Protocol::Holdout => "holdout",
        })
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nested_cv" | "nested-cv" => Ok(Protocol::NestedCv),
            "holdout" => Ok(Protocol::Holdout),
            other => Err(Error::InvalidInput(format!(
                "unknown protocol `{other}` (expected nested_cv or holdout)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    pub samples: usize,
    pub inner_folds: usize,
    pub outer_folds: usize,
    pub repeats: usize,
    /// Measure throughput and memory of every evaluated model.
    pub benchmark: bool,
    pub benchmark_repetitions: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            samples: 30,
            inner_folds: 5,
            outer_folds: 10,
            repeats: 9,
            benchmark: true,
            benchmark_repetitions: DEFAULT_REPETITIONS,
        }
    }
}

impl SearchBudget {
    /// Folds and repeats need at least 2 so that every round has training data
    /// and every summary has a confidence interval.
    pub fn validate(&self) -> Result<()> {
        for (name, v, min) in [
            ("samples", self.samples, 1),
            ("inner_folds", self.inner_folds, 2),
            ("outer_folds", self.outer_folds, 2),
            ("repeats", self.repeats, 2),
        ] {
            if v < min {
                return Err(Error::InvalidInput(format!("budget `{name}` must be at least {min}")));
            }
        }
        Ok(())
    }
}

/// Scores of one evaluation round (outer fold or hold-out iteration).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub hyperparameters: Hyperparameters,
    pub accuracy: f64,
    pub f_measure: f64,
    pub zero_support: Vec<usize>,
    pub throughput: Option<f64>,
    pub memory_artifact_mb: Option<f64>,
    pub memory_resident_mb: Option<f64>,
    /// Records scored in this round.
    pub test: Vec<usize>,
    /// Every record used to fit a model or choose its hyperparameters in this round.
    pub seen: Vec<usize>,
}

/// One model's evaluation under a protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub algorithm: Algorithm,
    pub protocol: Protocol,
    pub seed: u64,
    pub accuracy: MetricSummary,
    pub f_measure: MetricSummary,
    pub throughput: Option<MetricSummary>,
    pub memory_artifact_mb: Option<MetricSummary>,
    pub memory_resident_mb: Option<MetricSummary>,
    /// Some round scored a class with no predicted and no actual members.
    pub zero_support_f: bool,
    pub rounds: Vec<RoundOutcome>,
}

impl EvalEntry {
    fn from_rounds(algorithm: Algorithm, protocol: Protocol, seed: u64, rounds: Vec<RoundOutcome>) -> Result<Self> {
        let collect = |f: &dyn Fn(&RoundOutcome) -> Option<f64>| -> Result<Option<MetricSummary>> {
            let v: Option<Vec<f64>> = rounds.iter().map(f).collect();
            v.map(MetricSummary::from_samples).transpose()
        };
        Ok(Self {
            algorithm,
            protocol,
            seed,
            accuracy: MetricSummary::from_samples(rounds.iter().map(|r| r.accuracy).collect())?,
            f_measure: MetricSummary::from_samples(rounds.iter().map(|r| r.f_measure).collect())?,
            throughput: collect(&|r| r.throughput)?,
            memory_artifact_mb: collect(&|r| r.memory_artifact_mb)?,
            memory_resident_mb: collect(&|r| r.memory_resident_mb)?,
            zero_support_f: rounds.iter().any(|r| !r.zero_support.is_empty()),
            rounds,
        })
    }

    /// The configuration selected most often across rounds; earliest wins ties.
    pub fn consensus_hyperparameters(&self) -> Hyperparameters {
        let mut best: Option<(&Hyperparameters, usize)> = None;
        for r in &self.rounds {
            let count = self
                .rounds
                .iter()
                .filter(|o| o.hyperparameters == r.hyperparameters)
                .count();
            if best.map_or(true, |(_, c)| count > c) {
                best = Some((&r.hyperparameters, count));
            }
        }
        best.map(|(h, _)| h.clone()).unwrap_or_default()
    }

    /// Test records that were also used for fitting or selection in the same round.
    pub fn leakage(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (round, r) in self.rounds.iter().enumerate() {
            let seen: BTreeSet<usize> = r.seen.iter().copied().collect();
            out.extend(r.test.iter().filter(|i| seen.contains(i)).map(|&i| (round, i)));
        }
        out
    }
}

/// Mean inner-fold accuracy of each configuration on `train`; returns the best
/// (first on ties) and records the indices it touched.
fn select(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    train: &[usize],
    configs: Vec<Hyperparameters>,
    folds: usize,
    seed: u64,
    seen: &mut BTreeSet<usize>,
) -> Result<Hyperparameters> {
    if configs.len() == 1 {
        return Ok(configs.into_iter().next().expect("one config"));
    }
    let labels = dataset.labels();
    let plan = stratified_kfold_subset(&labels, train, folds, derive_seed(seed, &[0]))?;
    let parts: Vec<(Vec<usize>, Vec<usize>)> = (0..folds).map(|f| (plan.complement(f), plan.part(f))).collect();
    for (fit_idx, val_idx) in &parts {
        seen.extend(fit_idx);
        seen.extend(val_idx);
    }
    let mut best: Option<(f64, Hyperparameters)> = None;
    for (c, config) in configs.into_iter().enumerate() {
        let mut total = 0.0;
        for (f, (fit_idx, val_idx)) in parts.iter().enumerate() {
            let model = fit(algorithm, dataset, fit_idx, &config, derive_seed(seed, &[1, c as u64, f as u64]))?;
            let preds = model.predict_batch(dataset, val_idx)?;
            let truth: Vec<usize> = val_idx.iter().map(|&i| labels[i]).collect();
            total += accuracy(&preds, &truth)?;
        }
        let score = total / folds as f64;
        if best.as_ref().map_or(true, |(s, _)| score > *s) {
            best = Some((score, config));
        }
    }
    Ok(best.expect("at least one config").1)
}

fn score_round(
    model: &TrainedModel,
    dataset: &LabeledDataset,
    hyperparameters: Hyperparameters,
    test: Vec<usize>,
    seen: BTreeSet<usize>,
    budget: &SearchBudget,
) -> Result<RoundOutcome> {
    let preds = model.predict_batch(dataset, &test)?;
    let truth: Vec<usize> = test.iter().map(|&i| dataset.label(i)).collect();
    let f1 = macro_f1_detailed(&preds, &truth, dataset.num_devices())?;
    let (throughput, memory) = if budget.benchmark {
        (
            Some(measure_throughput(model, dataset, budget.benchmark_repetitions)?.ips),
            Some(measure_model_memory(model, dataset)?),
        )
    } else {
        (None, None)
    };
    Ok(RoundOutcome {
        hyperparameters,
        accuracy: accuracy(&preds, &truth)?,
        f_measure: f1.value,
        zero_support: f1.zero_support,
        throughput,
        memory_artifact_mb: memory.as_ref().map(|m| m.artifact_mb()),
        memory_resident_mb: memory.as_ref().map(|m| m.resident_mb()),
        test,
        seen: seen.into_iter().collect(),
    })
}

/// Stratified nested cross-validation: `outer_folds` outer folds, each tuned by
/// random search scored with `inner_folds`-fold accuracy on the outer training part.
pub fn nested_cv(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    space: &HyperparameterSpace,
    budget: &SearchBudget,
    seed: u64,
) -> Result<EvalEntry> {
    budget.validate()?;
    let outer = stratified_kfold(dataset, budget.outer_folds, seed)?;
    let rounds = (0..budget.outer_folds)
        .into_par_iter()
        .map(|f| {
            let train = outer.complement(f);
            let test = outer.part(f);
            let configs = space.draw_distinct(budget.samples, &mut stream(seed, &[1, f as u64]));
            let mut seen = BTreeSet::new();
            let best = select(
                algorithm,
                dataset,
                &train,
                configs,
                budget.inner_folds,
                derive_seed(seed, &[2, f as u64]),
                &mut seen,
            )?;
            seen.extend(&train);
            let model = fit(algorithm, dataset, &train, &best, derive_seed(seed, &[3, f as u64]))?;
            score_round(&model, dataset, best, test, seen, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    EvalEntry::from_rounds(algorithm, Protocol::NestedCv, seed, rounds)
}

/// Plain stratified k-fold evaluation of one configuration, seeded exactly as
/// `nested_cv` refits its outer folds.
pub fn cross_validate(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    hyperparameters: &Hyperparameters,
    budget: &SearchBudget,
    seed: u64,
) -> Result<EvalEntry> {
    budget.validate()?;
    let outer = stratified_kfold(dataset, budget.outer_folds, seed)?;
    let rounds = (0..budget.outer_folds)
        .into_par_iter()
        .map(|f| {
            let train = outer.complement(f);
            let model = fit(algorithm, dataset, &train, hyperparameters, derive_seed(seed, &[3, f as u64]))?;
            let seen = train.iter().copied().collect();
            score_round(&model, dataset, hyperparameters.clone(), outer.part(f), seen, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    EvalEntry::from_rounds(algorithm, Protocol::NestedCv, seed, rounds)
}

pub const HOLDOUT_FRACTIONS: [f64; 2] = [0.5, 0.5];

/// Hyperparameters tuned once by `inner_folds`-fold CV on the training half of
/// iteration 0, then `repeats` stratified 50-50 resplits with seeds `seed + i`.
pub fn repeated_holdout(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    space: &HyperparameterSpace,
    budget: &SearchBudget,
    seed: u64,
) -> Result<EvalEntry> {
    budget.validate()?;
    let first = stratified_holdout(dataset, &HOLDOUT_FRACTIONS, seed)?;
    let tuning_train = first.part(0);
    let configs = space.draw_distinct(budget.samples, &mut stream(seed, &[1]));
    let mut tuning_seen = BTreeSet::new();
    let best = select(
        algorithm,
        dataset,
        &tuning_train,
        configs,
        budget.inner_folds,
        derive_seed(seed, &[2]),
        &mut tuning_seen,
    )?;
    let rounds = (0..budget.repeats)
        .into_par_iter()
        .map(|i| {
            let split_seed = seed.wrapping_add(i as u64);
            let plan = stratified_holdout(dataset, &HOLDOUT_FRACTIONS, split_seed)?;
            let train = plan.part(0);
            let model = fit(algorithm, dataset, &train, &best, derive_seed(split_seed, &[3]))?;
            let seen = train.iter().copied().collect();
            score_round(&model, dataset, best.clone(), plan.part(1), seen, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    EvalEntry::from_rounds(algorithm, Protocol::Holdout, seed, rounds)
}

/// Runs `protocol` with the algorithm's default search space.
pub fn evaluate(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    protocol: Protocol,
    space: Option<&HyperparameterSpace>,
    budget: &SearchBudget,
    seed: u64,
) -> Result<EvalEntry> {
    let default_space;
    let space = match space {
        Some(s) => s,
        None => {
            default_space = HyperparameterSpace::default_for(algorithm);
            &default_space
        }
    };
    dataset.require_kind(algorithm.kind())?;
    match protocol {
        Protocol::NestedCv => nested_cv(algorithm, dataset, space, budget, seed),
        Protocol::Holdout => repeated_holdout(algorithm, dataset, space, budget, seed),
    }
}
