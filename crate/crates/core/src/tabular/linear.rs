//! Linear classifiers: multinomial logistic regression and one-vs-rest linear SVM.

use serde::{Deserialize, Serialize};

use crate::matrix::{softmax, Rows};

pub const LR_EPOCHS: usize = 500;
pub const SVM_EPOCHS: usize = 200;

/// Per-class weight rows and intercepts; scores are `W·x + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(num_classes: usize, dim: usize) -> Self {
        Self {
            weights: vec![vec![0.0; dim]; num_classes],
            intercepts: vec![0.0; num_classes],
        }
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }

    /// Softmax over the class scores.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.scores(x))
    }
}

/// Full-batch gradient descent on mean cross-entropy plus `l2/2·‖W‖²`.
///
/// Returns the model and, when `track` is set, the objective evaluated at the
/// start of every epoch.
pub(crate) fn fit_logistic(
    x: &Rows,
    y: &[usize],
    num_classes: usize,
    learning_rate: f64,
    l2: f64,
    epochs: usize,
    track: bool,
) -> (LinearModel, Vec<f64>) {
    let d = x.d;
    let k = num_classes;
    let n = x.n as f64;
    // Row-major `k × (d + 1)` with the intercept in the last column.
    let stride = d + 1;
    let mut w = vec![0.0; k * stride];
    let mut grad = vec![0.0; k * stride];
    let mut p = vec![0.0; k];
    let mut history = Vec::with_capacity(if track { epochs } else { 0 });
    for _ in 0..epochs {
        grad.iter_mut().for_each(|v| *v = 0.0);
        let mut loss = 0.0;
        for (i, &label) in y.iter().enumerate() {
            let row = x.row(i);
            let mut max = f64::NEG_INFINITY;
            for c in 0..k {
                let wc = &w[c * stride..(c + 1) * stride];
                let mut s = wc[d];
                for j in 0..d {
                    s += wc[j] * row[j];
                }
                p[c] = s;
                max = max.max(s);
            }
            let mut total = 0.0;
            for v in p.iter_mut() {
                *v = (*v - max).exp();
                total += *v;
            }
            if track {
                loss -= (p[label] / total).max(1e-300).ln();
            }
            let inv = 1.0 / total;
            for c in 0..k {
                let r = p[c] * inv - if c == label { 1.0 } else { 0.0 };
                let gc = &mut grad[c * stride..(c + 1) * stride];
                for j in 0..d {
                    gc[j] += r * row[j];
                }
                gc[d] += r;
            }
        }
        if track {
            let norm: f64 = (0..k).flat_map(|c| (0..d).map(move |j| (c, j))).map(|(c, j)| w[c * stride + j].powi(2)).sum();
            history.push(loss / n + 0.5 * l2 * norm);
        }
        for c in 0..k {
            for j in 0..d {
                let idx = c * stride + j;
                w[idx] -= learning_rate * (grad[idx] / n + l2 * w[idx]);
            }
            w[c * stride + d] -= learning_rate * grad[c * stride + d] / n;
        }
    }
    let model = LinearModel {
        weights: (0..k).map(|c| w[c * stride..c * stride + d].to_vec()).collect(),
        intercepts: (0..k).map(|c| w[c * stride + d]).collect(),
    };
    (model, history)
}

/// One-vs-rest hinge loss with `l2/2·‖w‖²`, minimized per class by full-batch
/// sub-gradient descent with step `learning_rate/√(epoch+1)`.
///
/// The lowest-objective iterate of each class is kept. Returns the model and
/// the summed objective over classes at every epoch.
pub(crate) fn fit_svm(
    x: &Rows,
    y: &[usize],
    num_classes: usize,
    learning_rate: f64,
    l2: f64,
    epochs: usize,
) -> (LinearModel, Vec<f64>) {
    let d = x.d;
    let n = x.n as f64;
    let mut model = LinearModel::zeros(num_classes, d);
    let mut history = vec![0.0; epochs];
    for c in 0..num_classes {
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut best = (f64::INFINITY, w.clone(), b);
        let mut grad = vec![0.0; d];
        for (epoch, h) in history.iter_mut().enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            let mut hinge = 0.0;
            for (i, &label) in y.iter().enumerate() {
                let row = x.row(i);
                let t = if label == c { 1.0 } else { -1.0 };
                let margin = t * (b + w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>());
                if margin < 1.0 {
                    hinge += 1.0 - margin;
                    grad_b -= t;
                    for (g, v) in grad.iter_mut().zip(row) {
                        *g -= t * v;
                    }
                }
            }
            let objective = hinge / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
            *h += objective;
            if objective < best.0 {
                best = (objective, w.clone(), b);
            }
            let step = learning_rate / ((epoch + 1) as f64).sqrt();
            for (wj, g) in w.iter_mut().zip(&grad) {
                *wj -= step * (g / n + l2 * *wj);
            }
            b -= step * grad_b / n;
        }
        model.weights[c] = best.1;
        model.intercepts[c] = best.2;
    }
    (model, history)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Rows, Vec<usize>) {
        let pts = [(-2.0, -1.0, 0), (-1.5, -2.0, 0), (-1.0, -1.2, 0), (1.0, 1.5, 1), (2.0, 1.0, 1), (1.2, 2.2, 1)];
        let data = pts.iter().flat_map(|p| [p.0, p.1]).collect();
        (Rows { data, n: pts.len(), d: 2 }, pts.iter().map(|p| p.2).collect())
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let m = LinearModel::zeros(4, 3);
        assert_eq!(m.predict_proba(&[1.0, 2.0, 3.0]), vec![0.25; 4]);
    }

    #[test]
    fn logistic_objective_decreases() {
        let (x, y) = separable();
        let (model, history) = fit_logistic(&x, &y, 2, 0.5, 1e-4, 100, true);
        assert_eq!(history.len(), 100);
        assert!(history.last().unwrap() < history.first().unwrap());
        for i in 0..x.n {
            assert_eq!(crate::matrix::argmax(&model.scores(x.row(i))), y[i]);
        }
    }

    #[test]
    fn svm_objective_decreases() {
        let (x, y) = separable();
        let (model, history) = fit_svm(&x, &y, 2, 0.1, 1e-4, 50);
        assert!(history.last().unwrap() < history.first().unwrap());
        for i in 0..x.n {
            assert_eq!(crate::matrix::argmax(&model.scores(x.row(i))), y[i]);
        }
    }
}
