//! K-nearest neighbors by exhaustive Euclidean scan.

use serde::{Deserialize, Serialize};

use crate::matrix::Rows;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub num_classes: usize,
    pub dim: usize,
    /// Row-major training points (standardized).
    pub points: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Knn {
    pub(crate) fn fit(x: &Rows, y: &[usize], num_classes: usize, k: usize) -> Self {
        Self {
            k,
            num_classes,
            dim: x.d,
            points: x.data.clone(),
            labels: y.to_vec(),
        }
    }

    /// The `k` nearest training indices ordered by (distance, index).
    pub fn neighbors(&self, query: &[f64]) -> Vec<(f64, usize)> {
        let n = self.labels.len();
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks_exact(self.dim)
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        let k = self.k.min(n);
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < n {
            dist.select_nth_unstable_by(k - 1, cmp);
            dist.truncate(k);
        }
        dist.sort_unstable_by(cmp);
        dist
    }

    fn votes(&self, neighbors: &[(f64, usize)]) -> Vec<usize> {
        let mut votes = vec![0usize; self.num_classes];
        for &(_, i) in neighbors {
            votes[self.labels[i]] += 1;
        }
        votes
    }

    pub fn predict_proba(&self, query: &[f64]) -> Vec<f64> {
        let nb = self.neighbors(query);
        let total = nb.len() as f64;
        self.votes(&nb).into_iter().map(|v| v as f64 / total).collect()
    }

    /// Majority vote; among tied classes the one holding the nearest neighbor wins.
    pub fn predict(&self, query: &[f64]) -> usize {
        let nb = self.neighbors(query);
        let votes = self.votes(&nb);
        let best = *votes.iter().max().expect("at least one class");
        nb.iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&c| votes[c] == best)
            .expect("winning class has a neighbor")
    }
}
