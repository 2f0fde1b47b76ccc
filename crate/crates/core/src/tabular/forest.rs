//! Random forest of CART trees with bootstrap sampling and per-split attribute subsets.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, presort, Gini, GrowParams, Tree};
use crate::matrix::argmax;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub num_classes: usize,
}

impl Forest {
    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.num_classes];
        for t in &self.trees {
            votes[argmax(t.value(x))] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= n);
        votes
    }
}

/// Tree `t` draws its attribute subsets from stream `[0, t]` and its bootstrap
/// sample from stream `[1, t]`, so a single-tree forest without bootstrap equals
/// a decision tree fitted with the same seed.
pub(crate) fn fit_forest(
    columns: &[Vec<f64>],
    labels: &[u32],
    num_classes: usize,
    params: GrowParams,
    n_trees: usize,
    bootstrap: bool,
    seed: u64,
) -> Forest {
    let n = labels.len();
    let sorted = presort(columns);
    let target = Gini { labels, num_classes };
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let weights = if bootstrap {
                let mut brng = rng::stream(seed, &[1, t as u64]);
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[brng.gen_range(0..n)] += 1.0;
                }
                w
            } else {
                vec![1.0; n]
            };
            let mut frng = rng::stream(seed, &[0, t as u64]);
            grow_tree(columns, &sorted, &weights, &target, params, Some(&mut frng))
        })
        .collect();
    Forest { trees, num_classes }
}
