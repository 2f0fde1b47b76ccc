//! Algorithm tags, hyperparameter values and random-search spaces.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nb,
    Knn,
    Lr,
    Svm,
    Dt,
    Rf,
    Gbm,
    RocketRidge,
    Onenn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Nb,
        Algorithm::Knn,
        Algorithm::Lr,
        Algorithm::Svm,
        Algorithm::Dt,
        Algorithm::Rf,
        Algorithm::Gbm,
        Algorithm::RocketRidge,
        Algorithm::Onenn,
    ];

    /// The non-sequential roster, in report order.
    pub const TABULAR: [Algorithm; 7] = [
        Algorithm::Nb,
        Algorithm::Lr,
        Algorithm::Dt,
        Algorithm::Knn,
        Algorithm::Svm,
        Algorithm::Rf,
        Algorithm::Gbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nb => "nb",
            Algorithm::Knn => "knn",
            Algorithm::Lr => "lr",
            Algorithm::Svm => "svm",
            Algorithm::Dt => "dt",
            Algorithm::Rf => "rf",
            Algorithm::Gbm => "gbm",
            Algorithm::RocketRidge => "rocket_ridge",
            Algorithm::Onenn => "onenn",
        }
    }

    /// Row label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::Nb => "NB",
            Algorithm::Knn => "KNN",
            Algorithm::Lr => "LR",
            Algorithm::Svm => "SVM",
            Algorithm::Dt => "DT",
            Algorithm::Rf => "RF",
            Algorithm::Gbm => "GBM",
            Algorithm::RocketRidge => "ROCKET",
            Algorithm::Onenn => "1NN",
        }
    }

    /// Dataset kind the algorithm trains on.
    pub fn kind(self) -> DatasetKind {
        match self {
            Algorithm::RocketRidge | Algorithm::Onenn => DatasetKind::Sequence,
            _ => DatasetKind::Tabular,
        }
    }

    /// Whether inputs are standardized before fitting.
    pub fn scale_sensitive(self) -> bool {
        matches!(self, Algorithm::Knn | Algorithm::Lr | Algorithm::Svm)
    }

    pub fn is_tree(self) -> bool {
        matches!(self, Algorithm::Dt | Algorithm::Rf)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

pub fn algorithm_names() -> Vec<&'static str> {
    Algorithm::ALL.iter().map(|a| a.name()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::Bool(b) => write!(f, "{b}"),
            HyperValue::Int(i) => write!(f, "{i}"),
            HyperValue::Real(r) => write!(f, "{r}"),
            HyperValue::Text(t) => f.write_str(t),
        }
    }
}

pub type Hyperparameters = BTreeMap<String, HyperValue>;

pub(crate) fn get_int(hp: &Hyperparameters, name: &str, default: i64) -> Result<i64> {
    match hp.get(name) {
        None => Ok(default),
        Some(HyperValue::Int(i)) => Ok(*i),
        Some(other) => Err(Error::hyper(name, format!("expected an integer, got {other}"))),
    }
}

pub(crate) fn get_real(hp: &Hyperparameters, name: &str, default: f64) -> Result<f64> {
    match hp.get(name) {
        None => Ok(default),
        Some(HyperValue::Real(r)) => Ok(*r),
        Some(HyperValue::Int(i)) => Ok(*i as f64),
        Some(other) => Err(Error::hyper(name, format!("expected a real, got {other}"))),
    }
}

pub(crate) fn get_bool(hp: &Hyperparameters, name: &str, default: bool) -> Result<bool> {
    match hp.get(name) {
        None => Ok(default),
        Some(HyperValue::Bool(b)) => Ok(*b),
        Some(other) => Err(Error::hyper(name, format!("expected a boolean, got {other}"))),
    }
}

pub(crate) fn get_reals(hp: &Hyperparameters, name: &str, default: &[f64]) -> Result<Vec<f64>> {
    match hp.get(name) {
        None => Ok(default.to_vec()),
        Some(HyperValue::Text(t)) => t
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::hyper(name, format!("`{s}` is not a real")))
            })
            .collect(),
        Some(HyperValue::Real(r)) => Ok(vec![*r]),
        Some(other) => Err(Error::hyper(name, format!("expected a comma-separated list, got {other}"))),
    }
}

pub(crate) fn positive_int(hp: &Hyperparameters, name: &str, default: i64) -> Result<usize> {
    let v = get_int(hp, name, default)?;
    if v < 1 {
        return Err(Error::hyper(name, format!("must be at least 1, got {v}")));
    }
    Ok(v as usize)
}

pub(crate) fn positive_real(hp: &Hyperparameters, name: &str, default: f64) -> Result<f64> {
    let v = get_real(hp, name, default)?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::hyper(name, format!("must be positive and finite, got {v}")));
    }
    Ok(v)
}

pub(crate) fn non_negative_real(hp: &Hyperparameters, name: &str, default: f64) -> Result<f64> {
    let v = get_real(hp, name, default)?;
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::hyper(name, format!("must be non-negative and finite, got {v}")));
    }
    Ok(v)
}

pub(crate) fn reject_unknown(hp: &Hyperparameters, known: &[&str]) -> Result<()> {
    match hp.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::hyper(k, "not a hyperparameter of this algorithm")),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamRange {
    /// Integers `lo, lo+step, ..., <= hi`.
    Int { lo: i64, hi: i64, step: i64 },
    LogUniform { lo: f64, hi: f64 },
    Choice { values: Vec<HyperValue> },
}

impl ParamRange {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HyperValue {
        match self {
            ParamRange::Int { lo, hi, step } => {
                let count = (hi - lo) / step + 1;
                HyperValue::Int(lo + step * rng.gen_range(0..count))
            }
            ParamRange::LogUniform { lo, hi } => HyperValue::Real(rng.gen_range(lo.ln()..=hi.ln()).exp()),
            ParamRange::Choice { values } => values[rng.gen_range(0..values.len())].clone(),
        }
    }

    fn cardinality(&self) -> Option<usize> {
        match self {
            ParamRange::Int { lo, hi, step } => Some(((hi - lo) / step + 1) as usize),
            ParamRange::LogUniform { lo, hi } if lo == hi => Some(1),
            ParamRange::LogUniform { .. } => None,
            ParamRange::Choice { values } => Some(values.len()),
        }
    }
}

/// Named ranges searched for one algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterSpace {
    pub params: Vec<(String, ParamRange)>,
}

impl HyperparameterSpace {
    /// Search space used when none is supplied.
    pub fn default_for(algorithm: Algorithm) -> Self {
        use ParamRange::*;
        let p = |name: &str, range: ParamRange| (name.to_string(), range);
        let params = match algorithm {
            Algorithm::Nb => vec![p("var_smoothing", LogUniform { lo: 1e-11, hi: 1e-7 })],
            Algorithm::Knn => vec![p("k", Int { lo: 1, hi: 31, step: 2 })],
            Algorithm::Lr => vec![
                p("learning_rate", LogUniform { lo: 0.05, hi: 2.0 }),
                p("l2", LogUniform { lo: 1e-6, hi: 1e-2 }),
            ],
            Algorithm::Svm => vec![
                p("learning_rate", LogUniform { lo: 0.01, hi: 1.0 }),
                p("l2", LogUniform { lo: 1e-6, hi: 1e-2 }),
            ],
            Algorithm::Dt => vec![
                p("max_depth", Int { lo: 2, hi: 20, step: 1 }),
                p("min_samples_split", Int { lo: 2, hi: 20, step: 1 }),
            ],
            Algorithm::Rf => vec![
                p("n_trees", Int { lo: 50, hi: 500, step: 50 }),
                p("max_depth", Int { lo: 4, hi: 24, step: 1 }),
                p("min_samples_split", Int { lo: 2, hi: 10, step: 1 }),
            ],
            Algorithm::Gbm => vec![
                p("rounds", Int { lo: 20, hi: 200, step: 10 }),
                p("learning_rate", LogUniform { lo: 0.03, hi: 0.3 }),
                p("max_depth", Int { lo: 2, hi: 5, step: 1 }),
            ],
            Algorithm::RocketRidge => vec![p(
                "kernels",
                Choice {
                    values: vec![HyperValue::Int(crate::seqclf::rocket::DEFAULT_KERNELS as i64)],
                },
            )],
            Algorithm::Onenn => vec![],
        };
        Self { params }
    }

    /// Space containing exactly one configuration.
    pub fn single(hp: &Hyperparameters) -> Self {
        Self {
            params: hp
                .iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        ParamRange::Choice {
                            values: vec![v.clone()],
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Hyperparameters {
        self.params
            .iter()
            .map(|(name, range)| (name.clone(), range.sample(rng)))
            .collect()
    }

    /// Number of distinct configurations, if finite.
    pub fn cardinality(&self) -> Option<usize> {
        self.params
            .iter()
            .try_fold(1usize, |acc, (_, r)| r.cardinality().map(|c| acc.saturating_mul(c)))
    }

    /// Up to `samples` distinct configurations, in draw order.
    pub fn draw_distinct<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Vec<Hyperparameters> {
        let target = self.cardinality().map_or(samples, |c| c.min(samples)).max(1);
        let mut out: Vec<Hyperparameters> = Vec::with_capacity(target);
        let mut draws = 0;
        while out.len() < target && draws < samples.max(1) * 100 {
            draws += 1;
            let hp = self.sample(rng);
            if !out.contains(&hp) {
                out.push(hp);
            }
        }
        out
    }
}
