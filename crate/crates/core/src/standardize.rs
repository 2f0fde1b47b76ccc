//! Z-score standardization fitted on training rows.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Per-attribute means and population standard deviations.
///
/// Attributes with zero standard deviation are constant on the fitting rows
/// and are mapped to 0 by [`StandardizationParams::apply`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
}

impl StandardizationParams {
    /// Fits on the dataset rows selected by `train_indices`.
    pub fn fit(dataset: &LabeledDataset, train_indices: &[usize]) -> Result<Self> {
        Self::fit_rows(train_indices.iter().map(|&i| dataset.features(i)))
    }

    /// Fits on arbitrary rows of equal width.
    pub fn fit_rows<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
        I::IntoIter: Clone,
    {
        let rows = rows.into_iter();
        let first = rows.clone().next().ok_or(Error::EmptyTrainingPartition)?;
        let dim = first.len();
        let mut sums = vec![0.0; dim];
        let mut n = 0usize;
        for row in rows.clone() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
            n += 1;
        }
        let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let mut sq = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in sq.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stddevs = sq.iter().map(|s| (s / n as f64).sqrt()).collect();
        Ok(Self { means, stddevs })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Indices of attributes with zero spread on the fitting rows.
    pub fn constant_attributes(&self) -> Vec<usize> {
        self.stddevs
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; values.len()];
        self.apply_into(values, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, values: &[f64], out: &mut [f64]) -> Result<()> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        for (j, (o, v)) in out.iter_mut().zip(values).enumerate() {
            let sd = self.stddevs[j];
            *o = if sd == 0.0 { 0.0 } else { (v - self.means[j]) / sd };
        }
        Ok(())
    }
}
