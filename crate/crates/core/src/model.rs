//! Fitted classifier artifacts.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetKind, LabeledDataset};
use crate::error::{Error, Result};
use crate::hyper::{Algorithm, Hyperparameters};
use crate::matrix::{argmax, softmax, Rows};
use crate::seqclf::{self, OneNn, RocketRidge};
use crate::standardize::StandardizationParams;
use crate::tabular::{self, forest::Forest, gbm::Gbm, knn::Knn, linear::LinearModel, nb::GaussianNb, tree::Tree};

const ARTIFACT_FORMAT: &str = "wfid-model";
const ARTIFACT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "state", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(GaussianNb),
    Knn(Knn),
    Linear(LinearModel),
    Tree(Tree),
    Forest(Forest),
    Gbm(Gbm),
    RocketRidge(RocketRidge),
    OneNn(OneNn),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub algorithm: Algorithm,
    pub hyperparameters: Hyperparameters,
    pub num_classes: usize,
    /// Tabular attribute count or trace length.
    pub num_attributes: usize,
    pub standardization: Option<StandardizationParams>,
    pub params: ModelParams,
}

/// Fits `algorithm` on the `train` records of `dataset`.
pub fn fit(
    algorithm: Algorithm,
    dataset: &LabeledDataset,
    train: &[usize],
    hyperparameters: &Hyperparameters,
    seed: u64,
) -> Result<TrainedModel> {
    dataset.require_kind(algorithm.kind())?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingPartition);
    }
    let classes: BTreeSet<usize> = train.iter().map(|&i| dataset.label(i)).collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let num_classes = dataset.num_devices();
    let (standardization, params) = match dataset.kind() {
        DatasetKind::Tabular => {
            let scaler = if algorithm.scale_sensitive() {
                Some(StandardizationParams::fit(dataset, train)?)
            } else {
                None
            };
            let x = Rows::from_dataset(dataset, train, scaler.as_ref())?;
            let y: Vec<usize> = train.iter().map(|&i| dataset.label(i)).collect();
            let params = tabular::fit_rows(algorithm, &x, &y, num_classes, hyperparameters, seed)?;
            (scaler, params)
        }
        DatasetKind::Sequence => (
            None,
            seqclf::fit_params(algorithm, dataset, train, hyperparameters, seed)?,
        ),
    };
    Ok(TrainedModel {
        algorithm,
        hyperparameters: hyperparameters.clone(),
        num_classes,
        num_attributes: dataset.num_attributes(),
        standardization,
        params,
    })
}

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a TrainedModel,
}

#[derive(Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    fn check(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.num_attributes {
            return Err(Error::DimensionMismatch {
                expected: self.num_attributes,
                found: features.len(),
            });
        }
        Ok(())
    }

    fn prepared<'a>(&self, features: &'a [f64], buf: &'a mut Vec<f64>) -> Result<&'a [f64]> {
        self.check(features)?;
        match &self.standardization {
            Some(s) => {
                buf.resize(features.len(), 0.0);
                s.apply_into(features, buf)?;
                Ok(buf)
            }
            None => Ok(features),
        }
    }

    /// Class probabilities, non-negative and summing to one.
    pub fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        let mut buf = Vec::new();
        let x = self.prepared(features, &mut buf)?;
        Ok(match &self.params {
            ModelParams::NaiveBayes(m) => m.predict_proba(x),
            ModelParams::Knn(m) => m.predict_proba(x),
            ModelParams::Linear(m) => m.predict_proba(x),
            ModelParams::Tree(t) => t.value(x).to_vec(),
            ModelParams::Forest(f) => f.predict_proba(x),
            ModelParams::Gbm(g) => g.predict_proba(x),
            ModelParams::RocketRidge(r) => softmax(&r.scores(x)?),
            ModelParams::OneNn(m) => {
                let mut p = vec![0.0; self.num_classes];
                p[m.predict(x)] = 1.0;
                p
            }
        })
    }

    /// Predicted class. KNN breaks vote ties toward the class of the nearest
    /// tied neighbor; every other algorithm takes the lowest-index argmax.
    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        let mut buf = Vec::new();
        let x = self.prepared(features, &mut buf)?;
        Ok(match &self.params {
            ModelParams::Knn(m) => m.predict(x),
            ModelParams::OneNn(m) => m.predict(x),
            _ => argmax(&self.predict_proba(features)?),
        })
    }

    /// Predictions for `indices` of `dataset`, in order, on the calling thread.
    pub fn predict_batch(&self, dataset: &LabeledDataset, indices: &[usize]) -> Result<Vec<usize>> {
        indices.iter().map(|&i| self.predict(dataset.features(i))).collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        serde_json::to_vec(&EnvelopeRef {
            format: ARTIFACT_FORMAT,
            version: ARTIFACT_VERSION,
            model: self,
        })
        .map_err(|e| Error::Artifact(e.to_string()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let env: Envelope = serde_json::from_slice(bytes).map_err(|e| Error::Artifact(e.to_string()))?;
        if env.format != ARTIFACT_FORMAT {
            return Err(Error::Artifact(format!("unexpected format `{}`", env.format)));
        }
        if env.version != ARTIFACT_VERSION {
            return Err(Error::Artifact(format!("unsupported version {}", env.version)));
        }
        Ok(env.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TabularFingerprint;
    use crate::hyper::HyperValue;

    fn one_attribute(points: &[(f64, usize)]) -> LabeledDataset {
        let records = points
            .iter()
            .map(|&(x, c)| TabularFingerprint::new([x, 0.0, 0.0, 0.0, 0.0], c).unwrap())
            .collect();
        LabeledDataset::tabular(records, 2).unwrap()
    }

    fn all(ds: &LabeledDataset) -> Vec<usize> {
        (0..ds.len()).collect()
    }

    #[test]
    fn naive_bayes_moments() {
        let ds = one_attribute(&[(0.0, 0), (2.0, 0), (4.0, 1), (6.0, 1)]);
        let m = fit(Algorithm::Nb, &ds, &all(&ds), &Hyperparameters::new(), 0).unwrap();
        let ModelParams::NaiveBayes(nb) = &m.params else { panic!() };
        assert_eq!(nb.means[0][0], 1.0);
        assert_eq!(nb.means[1][0], 5.0);
        assert!((nb.variances[0][0] - 1.0).abs() < 1e-6);
        assert!((nb.variances[1][0] - 1.0).abs() < 1e-6);
        assert_eq!(m.predict(&[2.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn knn_nearest_point() {
        let ds = one_attribute(&[(0.0, 0), (10.0, 1)]);
        let mut hp = Hyperparameters::new();
        hp.insert("k".into(), HyperValue::Int(1));
        let m = fit(Algorithm::Knn, &ds, &all(&ds), &hp, 0).unwrap();
        assert_eq!(m.predict(&[3.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn single_class_is_rejected() {
        let ds = one_attribute(&[(0.0, 0), (1.0, 0), (2.0, 1)]);
        assert!(matches!(
            fit(Algorithm::Dt, &ds, &[0, 1], &Hyperparameters::new(), 0),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn invalid_hyperparameter_is_named() {
        let ds = one_attribute(&[(0.0, 0), (2.0, 1)]);
        let mut hp = Hyperparameters::new();
        hp.insert("k".into(), HyperValue::Int(0));
        let err = fit(Algorithm::Knn, &ds, &all(&ds), &hp, 0).unwrap_err();
        assert!(err.to_string().contains("`k`"));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let ds = one_attribute(&[(0.0, 0), (2.0, 1)]);
        let m = fit(Algorithm::Dt, &ds, &all(&ds), &Hyperparameters::new(), 0).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn artifact_round_trip() {
        let ds = one_attribute(&[(0.0, 0), (0.5, 0), (4.0, 1), (6.0, 1)]);
        for a in Algorithm::TABULAR {
            let m = fit(a, &ds, &all(&ds), &Hyperparameters::new(), 3).unwrap();
            let back = TrainedModel::from_bytes(&m.to_bytes().unwrap()).unwrap();
            assert_eq!(back, m, "{a}");
        }
    }

    #[test]
    fn artifact_rejects_foreign_format() {
        let err = TrainedModel::from_bytes(br#"{"format":"other","version":1,"model":{}}"#);
        assert!(matches!(err, Err(Error::Artifact(_))));
    }
}
