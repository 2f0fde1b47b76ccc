//! Gaussian naive Bayes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::matrix::{softmax_in_place, Rows};

pub const DEFAULT_VAR_SMOOTHING: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Training rows per class.
    pub class_counts: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    /// Biased per-class variances plus the smoothing term.
    pub variances: Vec<Vec<f64>>,
    pub epsilon: f64,
}

impl GaussianNb {
    pub(crate) fn fit(x: &Rows, y: &[usize], num_classes: usize, var_smoothing: f64) -> Self {
        let d = x.d;
        let mut class_counts = vec![0usize; num_classes];
        let mut means = vec![vec![0.0; d]; num_classes];
        for (i, &c) in y.iter().enumerate() {
            class_counts[c] += 1;
            for (m, v) in means[c].iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for (c, m) in means.iter_mut().enumerate() {
            if class_counts[c] > 0 {
                m.iter_mut().for_each(|v| *v /= class_counts[c] as f64);
            }
        }
        let mut variances = vec![vec![0.0; d]; num_classes];
        for (i, &c) in y.iter().enumerate() {
            for ((s, v), m) in variances[c].iter_mut().zip(x.row(i)).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }

        // Smoothing is relative to the widest attribute over all training rows.
        let n = x.n as f64;
        let mut max_var: f64 = 0.0;
        for j in 0..d {
            let mean = (0..x.n).map(|i| x.row(i)[j]).sum::<f64>() / n;
            let var = (0..x.n).map(|i| (x.row(i)[j] - mean).powi(2)).sum::<f64>() / n;
            max_var = max_var.max(var);
        }
        let epsilon = if max_var > 0.0 {
            var_smoothing * max_var
        } else {
            var_smoothing
        };
        for (c, v) in variances.iter_mut().enumerate() {
            let count = class_counts[c].max(1) as f64;
            v.iter_mut().for_each(|s| *s = *s / count + epsilon);
        }
        Self {
            class_counts,
            means,
            variances,
            epsilon,
        }
    }

    /// Unnormalized log-posterior `log P(c) + Σ_j log N(x_j; μ_cj, σ²_cj)` per class;
    /// classes absent from training get `-inf`.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        let total: usize = self.class_counts.iter().sum();
        self.class_counts
            .iter()
            .enumerate()
            .map(|(c, &count)| {
                if count == 0 {
                    return f64::NEG_INFINITY;
                }
                let mut ll = (count as f64 / total as f64).ln();
                for ((v, m), s) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                    ll += -0.5 * (2.0 * PI * s).ln() - (v - m) * (v - m) / (2.0 * s);
                }
                ll
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = self.joint_log_likelihood(x);
        softmax_in_place(&mut p);
        p
    }
}
