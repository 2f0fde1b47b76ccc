//! Classifiers for tabular fingerprints.

pub mod forest;
pub mod gbm;
pub mod knn;
pub mod linear;
pub mod nb;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::{self as hp, Algorithm, Hyperparameters};
use crate::matrix::Rows;
use crate::model::{ModelParams, TrainedModel};
use crate::rng;

pub use tree::gini_impurity;

/// Fits one of the seven tabular algorithms on pre-extracted rows.
pub(crate) fn fit_rows(
    algorithm: Algorithm,
    x: &Rows,
    y: &[usize],
    num_classes: usize,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<ModelParams> {
    let labels32 = || y.iter().map(|&c| c as u32).collect::<Vec<u32>>();
    let params = match algorithm {
        Algorithm::Nb => {
            hp::reject_unknown(hyper, &["var_smoothing"])?;
            let smoothing = hp::non_negative_real(hyper, "var_smoothing", nb::DEFAULT_VAR_SMOOTHING)?;
            ModelParams::NaiveBayes(nb::GaussianNb::fit(x, y, num_classes, smoothing))
        }
        Algorithm::Knn => {
            hp::reject_unknown(hyper, &["k"])?;
            let k = hp::positive_int(hyper, "k", 5)?;
            ModelParams::Knn(knn::Knn::fit(x, y, num_classes, k))
        }
        Algorithm::Lr => {
            hp::reject_unknown(hyper, &["learning_rate", "l2", "epochs"])?;
            let lr = hp::positive_real(hyper, "learning_rate", 0.5)?;
            let l2 = hp::non_negative_real(hyper, "l2", 1e-4)?;
            let epochs = hp::positive_int(hyper, "epochs", linear::LR_EPOCHS as i64)?;
            ModelParams::Linear(linear::fit_logistic(x, y, num_classes, lr, l2, epochs, false).0)
        }
        Algorithm::Svm => {
            hp::reject_unknown(hyper, &["learning_rate", "l2", "epochs"])?;
            let lr = hp::positive_real(hyper, "learning_rate", 0.1)?;
            let l2 = hp::non_negative_real(hyper, "l2", 1e-4)?;
            let epochs = hp::positive_int(hyper, "epochs", linear::SVM_EPOCHS as i64)?;
            ModelParams::Linear(linear::fit_svm(x, y, num_classes, lr, l2, epochs).0)
        }
        Algorithm::Dt => {
            hp::reject_unknown(hyper, &["max_depth", "min_samples_split", "max_features"])?;
            let params = grow_params(hyper, x.d, x.d)?;
            let columns = x.columns();
            let labels = labels32();
            let target = tree::Gini {
                labels: &labels,
                num_classes,
            };
            let mut frng = rng::stream(seed, &[0, 0]);
            let t = tree::grow_tree(
                &columns,
                &tree::presort(&columns),
                &vec![1.0; x.n],
                &target,
                params,
                Some(&mut frng),
            );
            ModelParams::Tree(t)
        }
        Algorithm::Rf => {
            hp::reject_unknown(
                hyper,
                &["n_trees", "max_depth", "min_samples_split", "max_features", "bootstrap"],
            )?;
            let default_features = (x.d as f64).sqrt().ceil() as usize;
            let params = grow_params(hyper, x.d, default_features)?;
            let n_trees = hp::positive_int(hyper, "n_trees", 100)?;
            let bootstrap = hp::get_bool(hyper, "bootstrap", true)?;
            let columns = x.columns();
            ModelParams::Forest(forest::fit_forest(
                &columns,
                &labels32(),
                num_classes,
                params,
                n_trees,
                bootstrap,
                seed,
            ))
        }
        Algorithm::Gbm => {
            hp::reject_unknown(hyper, &["rounds", "learning_rate", "max_depth", "min_samples_split"])?;
            let rounds = hp::get_int(hyper, "rounds", 100)?;
            if rounds < 0 {
                return Err(Error::hyper("rounds", "must be non-negative"));
            }
            let lr = hp::positive_real(hyper, "learning_rate", 0.1)?;
            let max_depth = hp::positive_int(hyper, "max_depth", 3)?;
            let min_split = hp::positive_int(hyper, "min_samples_split", 2)?;
            let columns = x.columns();
            let (model, _) = gbm::fit_gbm(
                &columns,
                &labels32(),
                num_classes,
                rounds as usize,
                lr,
                max_depth,
                min_split,
            );
            ModelParams::Gbm(model)
        }
        Algorithm::RocketRidge | Algorithm::Onenn => {
            return Err(Error::KindMismatch(format!("{algorithm} is a sequence classifier")))
        }
    };
    Ok(params)
}

fn grow_params(hyper: &Hyperparameters, d: usize, default_features: usize) -> Result<tree::GrowParams> {
    let max_depth = hp::positive_int(hyper, "max_depth", 32)?;
    let min_samples_split = hp::positive_int(hyper, "min_samples_split", 2)?;
    let max_features = hp::positive_int(hyper, "max_features", default_features as i64)?;
    if max_features > d {
        return Err(Error::hyper("max_features", format!("{max_features} exceeds the {d} attributes")));
    }
    Ok(tree::GrowParams {
        max_depth,
        min_samples_split,
        max_features,
    })
}

/// Mean-decrease-in-impurity importances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdiImportance {
    /// Non-negative per-attribute scores summing to 1, or all zero when `no_splits`.
    pub values: Vec<f64>,
    pub no_splits: bool,
}

fn normalized(mut gains: Vec<f64>) -> Vec<f64> {
    let total: f64 = gains.iter().sum();
    if total > 0.0 {
        gains.iter_mut().for_each(|g| *g /= total);
    }
    gains
}

/// Per-attribute impurity decrease of a DT (or averaged over the trees of an RF).
pub fn feature_importance_mdi(model: &TrainedModel) -> Result<MdiImportance> {
    let trees: Vec<&tree::Tree> = match &model.params {
        ModelParams::Tree(t) => vec![t],
        ModelParams::Forest(f) => f.trees.iter().collect(),
        _ => return Err(Error::NotTreeModel(model.algorithm.to_string())),
    };
    let d = model.num_attributes;
    let mut values = vec![0.0; d];
    for t in &trees {
        for (v, g) in values.iter_mut().zip(normalized(t.gain_by_feature())) {
            *v += g / trees.len() as f64;
        }
    }
    let no_splits = trees.iter().all(|t| t.num_splits() == 0);
    Ok(MdiImportance {
        values: normalized(values),
        no_splits,
    })
}
