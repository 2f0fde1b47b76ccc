//! Closed-form ridge regression and the one-vs-rest ridge classifier.

use std::sync::Once;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::argmax;
use crate::standardize::StandardizationParams;

/// Regularization grid `10^-3 .. 10^3`, ten log-spaced points.
pub fn default_lambdas() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 9.0)).collect()
}

fn sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Eigendecomposition of the smaller Gram matrix of a design matrix, reusable
/// for any regularization strength.
///
/// With `n ≥ p` the primal system `(XᵀX + λI)W = XᵀY` is diagonalized; with
/// `n < p` the dual `W = Xᵀ(XXᵀ + λI)⁻¹Y`. Both yield the same `W`.
pub struct RidgeSolver {
    x: Mat<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
    dual: bool,
}

impl RidgeSolver {
    pub fn new(x: Mat<f64>) -> Result<Self> {
        sequential();
        let (n, p) = (x.nrows(), x.ncols());
        if p == 0 {
            return Err(Error::NoFeatures);
        }
        let dual = n < p;
        let dim = if dual { n } else { p };
        let mut gram = Mat::<f64>::zeros(dim, dim);
        if dual {
            matmul(gram.as_mut(), Accum::Replace, x.as_ref(), x.transpose(), 1.0, Par::Seq);
        } else {
            matmul(gram.as_mut(), Accum::Replace, x.transpose(), x.as_ref(), 1.0, Par::Seq);
        }
        let eig = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::InvalidInput(format!("ridge eigendecomposition failed: {e:?}")))?;
        let values = eig.S().column_vector();
        let eigenvalues = (0..dim).map(|i| values[i].max(0.0)).collect();
        Ok(Self {
            eigenvectors: eig.U().to_owned(),
            eigenvalues,
            x,
            dual,
        })
    }

    pub fn design(&self) -> MatRef<'_, f64> {
        self.x.as_ref()
    }

    /// Projection of the targets onto the eigenbasis, shared across `lambda`s.
    pub fn project(&self, y: MatRef<'_, f64>) -> Mat<f64> {
        let q = self.eigenvectors.as_ref();
        let mut rhs = if self.dual {
            y.to_owned()
        } else {
            let mut r = Mat::<f64>::zeros(self.x.ncols(), y.ncols());
            matmul(r.as_mut(), Accum::Replace, self.x.transpose(), y, 1.0, Par::Seq);
            r
        };
        let mut proj = Mat::<f64>::zeros(q.ncols(), y.ncols());
        matmul(proj.as_mut(), Accum::Replace, q.transpose(), rhs.as_ref(), 1.0, Par::Seq);
        rhs = proj;
        rhs
    }

    /// Weights (`p × targets`) for one regularization strength from a projection.
    pub fn solve_projected(&self, projected: MatRef<'_, f64>, lambda: f64) -> Mat<f64> {
        let mut scaled = projected.to_owned();
        for i in 0..scaled.nrows() {
            let s = 1.0 / (self.eigenvalues[i] + lambda);
            for j in 0..scaled.ncols() {
                scaled[(i, j)] *= s;
            }
        }
        let q = self.eigenvectors.as_ref();
        let mut coef = Mat::<f64>::zeros(q.nrows(), scaled.ncols());
        matmul(coef.as_mut(), Accum::Replace, q, scaled.as_ref(), 1.0, Par::Seq);
        if self.dual {
            let mut w = Mat::<f64>::zeros(self.x.ncols(), scaled.ncols());
            matmul(w.as_mut(), Accum::Replace, self.x.transpose(), coef.as_ref(), 1.0, Par::Seq);
            w
        } else {
            coef
        }
    }

    pub fn solve(&self, y: MatRef<'_, f64>, lambda: f64) -> Mat<f64> {
        self.solve_projected(self.project(y).as_ref(), lambda)
    }
}

/// Ridge weights for row-major `rows` (n × p) and `targets` (n × t), as p × t rows.
pub fn solve_dense(rows: &[Vec<f64>], targets: &[Vec<f64>], lambda: f64) -> Result<Vec<Vec<f64>>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    let t = targets.first().map_or(0, Vec::len);
    if targets.len() != n {
        return Err(Error::InvalidInput(format!("{} target rows for {n} feature rows", targets.len())));
    }
    let x = Mat::<f64>::from_fn(n, p, |i, j| rows[i][j]);
    let y = Mat::<f64>::from_fn(n, t, |i, j| targets[i][j]);
    let w = RidgeSolver::new(x)?.solve(y.as_ref(), lambda);
    Ok((0..p).map(|i| (0..t).map(|j| w[(i, j)]).collect()).collect())
}

/// One-vs-rest ridge classifier on standardized features with ±1 targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeOvr {
    /// `classes × features`.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub lambda: f64,
    pub scaler: StandardizationParams,
}

impl RidgeOvr {
    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        let z = self.scaler.apply(features)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| b + w.iter().zip(&z).map(|(a, v)| a * v).sum::<f64>())
            .collect())
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(features)?))
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().flatten().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// Standardized design matrix and centered ±1 targets of a training set.
pub(crate) struct RidgeProblem {
    pub scaler: StandardizationParams,
    pub solver: RidgeSolver,
    pub projected: Mat<f64>,
    pub target_means: Vec<f64>,
}

impl RidgeProblem {
    pub fn new(features: &[&[f64]], labels: &[usize], num_classes: usize) -> Result<Self> {
        let scaler = StandardizationParams::fit_rows(features.iter().copied())?;
        let n = features.len();
        let p = scaler.dim();
        let mut x = Mat::<f64>::zeros(n, p);
        let mut row = vec![0.0; p];
        for (i, f) in features.iter().enumerate() {
            scaler.apply_into(f, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                x[(i, j)] = *v;
            }
        }
        let mut target_means = vec![0.0; num_classes];
        for &y in labels {
            target_means[y] += 1.0;
        }
        for m in target_means.iter_mut() {
            *m = (2.0 * *m - n as f64) / n as f64;
        }
        let y = Mat::<f64>::from_fn(n, num_classes, |i, c| {
            let t = if labels[i] == c { 1.0 } else { -1.0 };
            t - target_means[c]
        });
        let solver = RidgeSolver::new(x)?;
        let projected = solver.project(y.as_ref());
        Ok(Self {
            scaler,
            solver,
            projected,
            target_means,
        })
    }

    pub fn model(&self, lambda: f64) -> RidgeOvr {
        let w = self.solver.solve_projected(self.projected.as_ref(), lambda);
        let weights = (0..w.ncols())
            .map(|c| (0..w.nrows()).map(|j| w[(j, c)]).collect())
            .collect();
        RidgeOvr {
            weights,
            intercepts: self.target_means.clone(),
            lambda,
            scaler: self.scaler.clone(),
        }
    }
}
