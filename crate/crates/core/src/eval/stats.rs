use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Student-t 99% interval: `(mean, t(0.995, n−1)·s/√n)` with the sample standard deviation.
pub fn confidence_interval_99(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a confidence interval needs at least 2 samples, got {n}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .inverse_cdf(0.995);
    Ok((mean, t * var.sqrt() / (n as f64).sqrt()))
}

/// Mean, half-width and the samples they summarize.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub ci99: f64,
    pub n: usize,
    pub samples: Vec<f64>,
}

impl MetricSummary {
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        let (mean, ci99) = confidence_interval_99(&samples)?;
        Ok(Self {
            mean,
            ci99,
            n: samples.len(),
            samples,
        })
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_width() {
        assert_eq!(confidence_interval_99(&[5.0, 5.0, 5.0]).unwrap(), (5.0, 0.0));
    }

    #[test]
    fn two_samples() {
        let (m, h) = confidence_interval_99(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((h - 63.657).abs() < 5e-4, "{h}");
    }

    #[test]
    fn single_sample_is_an_error() {
        assert!(confidence_interval_99(&[1.0]).is_err());
    }

    #[test]
    fn median_of_three() {
        assert_eq!(median(&[100.0, 120.0, 110.0]), 110.0);
    }
}
