use crate::dataset::LabeledDataset;
use crate::error::Result;
use crate::standardize::StandardizationParams;

/// Dense row-major training matrix.
#[derive(Clone, Debug)]
pub(crate) struct Rows {
    pub data: Vec<f64>,
    pub n: usize,
    pub d: usize,
}

impl Rows {
    pub fn from_dataset(
        dataset: &LabeledDataset,
        indices: &[usize],
        scaler: Option<&StandardizationParams>,
    ) -> Result<Self> {
        let d = dataset.num_attributes();
        let mut data = vec![0.0; indices.len() * d];
        for (r, &i) in indices.iter().enumerate() {
            let out = &mut data[r * d..(r + 1) * d];
            match scaler {
                Some(s) => s.apply_into(dataset.features(i), out)?,
                None => out.copy_from_slice(dataset.features(i)),
            }
        }
        Ok(Self {
            data,
            n: indices.len(),
            d,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Column-major copy.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.d)
            .map(|j| (0..self.n).map(|i| self.data[i * self.d + j]).collect())
            .collect()
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let mut out = scores.to_vec();
    softmax_in_place(&mut out);
    out
}

pub(crate) fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}
