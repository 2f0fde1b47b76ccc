//! Nearest-neighbor baseline on raw amplitude traces.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneNn {
    pub dim: usize,
    pub traces: Vec<f64>,
    pub labels: Vec<usize>,
}

impl OneNn {
    /// Index of the closest training trace; ties go to the lower index.
    pub fn nearest(&self, query: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, t) in self.traces.chunks_exact(self.dim).enumerate() {
            let d: f64 = t.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn predict(&self, query: &[f64]) -> usize {
        self.labels[self.nearest(query)]
    }
}
