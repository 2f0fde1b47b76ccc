//! Classifiers for CSI amplitude traces: ROCKET features with a ridge head,
//! and a nearest-neighbor baseline.

pub mod onenn;
pub mod ridge;
pub mod rocket;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::hyper::{self as hp, Algorithm, Hyperparameters};
use crate::matrix::argmax;
use crate::model::{ModelParams, TrainedModel};
use crate::split::stratified_kfold_subset;

pub use onenn::OneNn;
pub use ridge::{default_lambdas, RidgeOvr};
pub use rocket::{apply_kernel, sample_kernels, RocketKernel, RocketTransform, DEFAULT_KERNELS};

const INNER_FOLDS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocketRidge {
    pub transform: RocketTransform,
    pub ridge: RidgeOvr,
}

impl RocketRidge {
    pub fn scores(&self, trace: &[f64]) -> Result<Vec<f64>> {
        self.ridge.scores(&self.transform.transform(trace)?)
    }

    pub fn predict(&self, trace: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(trace)?))
    }
}

/// Picks the grid value with the best inner cross-validated accuracy; ties go
/// to the larger regularization strength.
fn select_lambda(
    features: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    lambdas: &[f64],
    seed: u64,
) -> Result<f64> {
    let mut order: Vec<f64> = lambdas.to_vec();
    order.sort_by(|a, b| a.total_cmp(b));
    if order.len() == 1 {
        return Ok(order[0]);
    }
    let mut counts = vec![0usize; num_classes];
    labels.iter().for_each(|&y| counts[y] += 1);
    let smallest = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    let folds = INNER_FOLDS.min(smallest);
    if folds < 2 {
        return Ok(order[order.len() / 2]);
    }
    let all: Vec<usize> = (0..labels.len()).collect();
    let plan = stratified_kfold_subset(labels, &all, folds, seed)?;
    let mut correct = vec![0usize; order.len()];
    for f in 0..folds {
        let train = plan.complement(f);
        let test = plan.part(f);
        let rows: Vec<&[f64]> = train.iter().map(|&i| features[i].as_slice()).collect();
        let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let problem = ridge::RidgeProblem::new(&rows, &y, num_classes)?;
        for (slot, &lambda) in correct.iter_mut().zip(&order) {
            let model = problem.model(lambda);
            for &i in &test {
                if model.predict(&features[i])? == labels[i] {
                    *slot += 1;
                }
            }
        }
    }
    let mut best = 0;
    for (i, &c) in correct.iter().enumerate() {
        if c >= correct[best] {
            best = i;
        }
    }
    Ok(order[best])
}

/// ROCKET transform plus ridge one-vs-rest, with the regularization strength
/// chosen by inner stratified cross-validation on the training traces.
pub fn rocket_fit(
    dataset: &LabeledDataset,
    train: &[usize],
    kernels: usize,
    lambdas: &[f64],
    seed: u64,
) -> Result<RocketRidge> {
    let length = dataset
        .trace_length()
        .ok_or_else(|| Error::KindMismatch("rocket_ridge requires a sequence dataset".into()))?;
    if kernels == 0 {
        return Err(Error::NoFeatures);
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::hyper("lambdas", "must be a non-empty list of positive reals"));
    }
    let transform = RocketTransform::new(kernels, length, crate::rng::derive_seed(seed, &[0]))?;
    let traces: Vec<&[f64]> = train.iter().map(|&i| dataset.features(i)).collect();
    let features = transform.transform_many(&traces)?;
    let labels: Vec<usize> = train.iter().map(|&i| dataset.label(i)).collect();
    let num_classes = dataset.num_devices();
    let lambda = select_lambda(&features, &labels, num_classes, lambdas, crate::rng::derive_seed(seed, &[1]))?;
    let rows: Vec<&[f64]> = features.iter().map(Vec::as_slice).collect();
    let ridge = ridge::RidgeProblem::new(&rows, &labels, num_classes)?.model(lambda);
    Ok(RocketRidge { transform, ridge })
}

pub fn onenn_fit(dataset: &LabeledDataset, train: &[usize]) -> Result<OneNn> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingPartition);
    }
    let dim = dataset.num_attributes();
    let mut traces = Vec::with_capacity(train.len() * dim);
    for &i in train {
        traces.extend_from_slice(dataset.features(i));
    }
    Ok(OneNn {
        dim,
        traces,
        labels: train.iter().map(|&i| dataset.label(i)).collect(),
    })
}

pub(crate) fn fit_params(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    train: &[usize],
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<ModelParams> {
    match algorithm {
        Algorithm::RocketRidge => {
            hp::reject_unknown(hyper, &["kernels", "lambdas"])?;
            let kernels = hp::get_int(hyper, "kernels", DEFAULT_KERNELS as i64)?;
            if kernels < 0 {
                return Err(Error::hyper("kernels", "must be non-negative"));
            }
            let lambdas = hp::get_reals(hyper, "lambdas", &default_lambdas())?;
            Ok(ModelParams::RocketRidge(rocket_fit(
                dataset,
                train,
                kernels as usize,
                &lambdas,
                seed,
            )?))
        }
        Algorithm::Onenn => {
            hp::reject_unknown(hyper, &[])?;
            Ok(ModelParams::OneNn(onenn_fit(dataset, train)?))
        }
        other => Err(Error::KindMismatch(format!("{other} is a tabular classifier"))),
    }
}

/// Convenience wrapper returning a full model artifact.
pub fn fit_rocket_model(
    dataset: &LabeledDataset,
    train: &[usize],
    kernels: usize,
    seed: u64,
) -> Result<TrainedModel> {
    let mut hyper = Hyperparameters::new();
    hyper.insert("kernels".into(), hp::HyperValue::Int(kernels as i64));
    crate::model::fit(Algorithm::RocketRidge, dataset, train, &hyper, seed)
}
