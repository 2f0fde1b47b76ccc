//! Multiclass gradient boosting: stagewise additive softmax model.
//!
//! Each round fits one regression tree per class to the negative gradient of
//! the cross-entropy and sets leaf values by a single Newton step. A round whose
//! shrunken update would raise the training loss is retried with half the step;
//! boosting stops if no step size helps.

use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, presort, GrowParams, Newton, Tree};
use crate::matrix::softmax_in_place;

const MAX_BACKTRACKS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub step: f64,
    pub trees: Vec<Tree>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gbm {
    /// Initial scores: log class priors.
    pub init: Vec<f64>,
    pub stages: Vec<Stage>,
}

impl Gbm {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.init.clone();
        for stage in &self.stages {
            for (fk, tree) in f.iter_mut().zip(&stage.trees) {
                *fk += stage.step * tree.value(x)[0];
            }
        }
        f
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut f = self.scores(x);
        softmax_in_place(&mut f);
        f
    }
}

/// Mean multiclass cross-entropy of row-major scores.
fn cross_entropy(scores: &[f64], labels: &[u32], k: usize) -> f64 {
    let mut p = vec![0.0; k];
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        p.copy_from_slice(&scores[i * k..(i + 1) * k]);
        softmax_in_place(&mut p);
        total -= p[y as usize].max(1e-300).ln();
    }
    total / labels.len() as f64
}

/// Returns the model and the training loss before the first round and after each kept round.
pub(crate) fn fit_gbm(
    columns: &[Vec<f64>],
    labels: &[u32],
    num_classes: usize,
    rounds: usize,
    learning_rate: f64,
    max_depth: usize,
    min_samples_split: usize,
) -> (Gbm, Vec<f64>) {
    let n = labels.len();
    let k = num_classes;
    let mut counts = vec![0.0; k];
    for &y in labels {
        counts[y as usize] += 1.0;
    }
    let init: Vec<f64> = counts.iter().map(|c| (c / n as f64).max(1e-300).ln()).collect();

    let sorted = presort(columns);
    let weights = vec![1.0; n];
    let params = GrowParams {
        max_depth,
        min_samples_split,
        max_features: columns.len(),
    };
    let scale = (k as f64 - 1.0) / k as f64;

    let mut scores: Vec<f64> = (0..n).flat_map(|_| init.iter().copied()).collect();
    let mut loss = cross_entropy(&scores, labels, k);
    let mut history = vec![loss];
    let mut stages = Vec::with_capacity(rounds);
    let mut probs = vec![0.0; n * k];
    let mut gradients = vec![0.0; n];
    let mut hessians = vec![0.0; n];
    let row = |i: usize| -> Vec<f64> { columns.iter().map(|c| c[i]).collect() };
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();

    for _ in 0..rounds {
        probs.copy_from_slice(&scores);
        for p in probs.chunks_exact_mut(k) {
            softmax_in_place(p);
        }
        let mut trees = Vec::with_capacity(k);
        let mut update = vec![0.0; n * k];
        for class in 0..k {
            for i in 0..n {
                let y = if labels[i] as usize == class { 1.0 } else { 0.0 };
                let g = y - probs[i * k + class];
                gradients[i] = g;
                hessians[i] = g.abs() * (1.0 - g.abs());
            }
            let target = Newton {
                gradients: &gradients,
                hessians: &hessians,
                scale,
            };
            let tree = grow_tree(columns, &sorted, &weights, &target, params, None);
            for (i, r) in rows.iter().enumerate() {
                update[i * k + class] = tree.value(r)[0];
            }
            trees.push(tree);
        }

        let mut step = learning_rate;
        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            let candidate: Vec<f64> = scores.iter().zip(&update).map(|(s, u)| s + step * u).collect();
            let new_loss = cross_entropy(&candidate, labels, k);
            if new_loss <= loss {
                accepted = Some((candidate, new_loss));
                break;
            }
            step /= 2.0;
        }
        let Some((candidate, new_loss)) = accepted else {
            break;
        };
        scores = candidate;
        loss = new_loss;
        history.push(loss);
        stages.push(Stage { step, trees });
    }
    (Gbm { init, stages }, history)
}
