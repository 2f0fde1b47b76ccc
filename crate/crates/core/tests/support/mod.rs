//! Independent reference implementations and fixtures shared by the
//! integration tests and the acceptance suite.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use wfid::hyper::{HyperValue, Hyperparameters};
use wfid::model::ModelParams;
use wfid::seqclf::{apply_kernel, sample_kernels, RocketKernel};
use wfid::split::SplitPlan;
use wfid::{fit, Algorithm, LabeledDataset, TabularFingerprint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hyper(pairs: &[(&str, HyperValue)]) -> Hyperparameters {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Random tabular dataset with class-shifted Gaussian attributes.
pub fn random_tabular(rows: usize, classes: usize, seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let centers: Vec<[f64; 5]> = (0..classes)
        .map(|_| std::array::from_fn(|_| r.gen_range(-3.0..3.0)))
        .collect();
    let scales: [f64; 5] = std::array::from_fn(|_| r.gen_range(0.1..10.0));
    let records = (0..rows)
        .map(|i| {
            let c = if i < classes { i } else { r.gen_range(0..classes) };
            let values = std::array::from_fn(|j| {
                let z: f64 = r.sample(StandardNormal);
                (centers[c][j] + z) * scales[j]
            });
            TabularFingerprint::new(values, c).unwrap()
        })
        .collect();
    LabeledDataset::tabular(records, classes).unwrap()
}

/// Dataset with the given label sequence and arbitrary finite attributes.
pub fn labelled(labels: &[usize], classes: usize) -> LabeledDataset {
    let records = labels
        .iter()
        .enumerate()
        .map(|(i, &c)| TabularFingerprint::new([i as f64, 0.0, 0.0, 0.0, 0.0], c).unwrap())
        .collect();
    LabeledDataset::tabular(records, classes).unwrap()
}

// ---------------------------------------------------------------- naive Bayes

/// `log P(c) + Σ_j log N(x_j; μ_cj, σ²_cj)` from scratch, with biased variances
/// plus `smoothing × max population variance`.
pub fn nb_reference(train: &[Vec<f64>], labels: &[usize], classes: usize, smoothing: f64, x: &[f64]) -> Vec<f64> {
    let n = train.len() as f64;
    let d = x.len();
    let max_var = (0..d)
        .map(|j| {
            let m = train.iter().map(|r| r[j]).sum::<f64>() / n;
            train.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
        })
        .fold(0.0, f64::max);
    let eps = smoothing * max_var;
    (0..classes)
        .map(|c| {
            let rows: Vec<&Vec<f64>> = train.iter().zip(labels).filter(|(_, &y)| y == c).map(|(r, _)| r).collect();
            if rows.is_empty() {
                return f64::NEG_INFINITY;
            }
            let nc = rows.len() as f64;
            let mut lp = (nc / n).ln();
            for j in 0..d {
                let mu = rows.iter().map(|r| r[j]).sum::<f64>() / nc;
                let var = rows.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / nc + eps;
                let density = (-(x[j] - mu).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
                lp += if density > 1e-290 {
                    density.ln()
                } else {
                    -0.5 * (2.0 * PI * var).ln() - (x[j] - mu).powi(2) / (2.0 * var)
                };
            }
            lp
        })
        .collect()
}

/// Worst absolute log-posterior deviation of fitted NB from the reference over
/// `datasets` random datasets of at most 100 rows.
pub fn nb_oracle_max_error(datasets: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for t in 0..datasets as u64 {
        let mut r = rng(seed ^ (t << 20));
        let rows = r.gen_range(10..=100);
        let classes = r.gen_range(2..=4);
        let ds = random_tabular(rows, classes, seed.wrapping_add(t));
        let train: Vec<usize> = (0..ds.len()).collect();
        let smoothing = 1e-9;
        let model = fit(Algorithm::Nb, &ds, &train, &hyper(&[("var_smoothing", HyperValue::Real(smoothing))]), 0).unwrap();
        let ModelParams::NaiveBayes(nb) = &model.params else {
            panic!("expected a naive Bayes model")
        };
        let x: Vec<Vec<f64>> = train.iter().map(|&i| ds.features(i).to_vec()).collect();
        let y = ds.labels();
        for q in 0..10 {
            let query: Vec<f64> = if q < 5 {
                x[r.gen_range(0..x.len())].clone()
            } else {
                (0..5).map(|_| r.gen_range(-40.0..40.0)).collect()
            };
            let expected = nb_reference(&x, &y, classes, smoothing, &query);
            let got = nb.joint_log_likelihood(&query);
            for (a, b) in got.iter().zip(&expected) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

// ------------------------------------------------------------------------ KNN

/// Population z-scores fitted on `train`; constant attributes map to 0.
pub fn zscore(train: &[Vec<f64>]) -> impl Fn(&[f64]) -> Vec<f64> {
    let n = train.len() as f64;
    let d = train[0].len();
    let means: Vec<f64> = (0..d).map(|j| train.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let sds: Vec<f64> = (0..d)
        .map(|j| (train.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    move |x: &[f64]| {
        x.iter()
            .enumerate()
            .map(|(j, v)| if sds[j] > 0.0 { (v - means[j]) / sds[j] } else { 0.0 })
            .collect()
    }
}

/// Exhaustive k-NN vote: full sort by (distance, index), majority, ties to the
/// class of the nearest neighbor among the tied classes.
pub fn knn_reference(train: &[Vec<f64>], labels: &[usize], classes: usize, k: usize, query: &[f64]) -> usize {
    let mut all: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, p)| (p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let nearest = &all[..k.min(all.len())];
    let mut votes = vec![0; classes];
    for &(_, i) in nearest {
        votes[labels[i]] += 1;
    }
    let top = *votes.iter().max().unwrap();
    nearest.iter().map(|&(_, i)| labels[i]).find(|&c| votes[c] == top).unwrap()
}

/// Number of disagreements between the KNN model and the reference, over
/// `datasets` random 500-row datasets and every `k` in `ks`.
pub fn knn_oracle_mismatches(datasets: usize, ks: &[usize], seed: u64) -> usize {
    let mut mismatches = 0;
    for t in 0..datasets as u64 {
        let ds = random_tabular(500, 3 + t as usize % 3, seed.wrapping_add(t));
        let train: Vec<usize> = (0..400).collect();
        let raw: Vec<Vec<f64>> = train.iter().map(|&i| ds.features(i).to_vec()).collect();
        let scale = zscore(&raw);
        let points: Vec<Vec<f64>> = raw.iter().map(|r| scale(r)).collect();
        let labels: Vec<usize> = train.iter().map(|&i| ds.label(i)).collect();
        for &k in ks {
            let model = fit(Algorithm::Knn, &ds, &train, &hyper(&[("k", HyperValue::Int(k as i64))]), 0).unwrap();
            for i in 0..ds.len() {
                let expected = knn_reference(&points, &labels, ds.num_devices(), k, &scale(ds.features(i)));
                if model.predict(ds.features(i)).unwrap() != expected {
                    mismatches += 1;
                }
            }
        }
    }
    mismatches
}

// ---------------------------------------------------------------------- ridge

/// `‖(XᵀX + λI)W − XᵀY‖_F / ‖XᵀY‖_F` computed with plain loops.
pub fn normal_equation_residual(x: &[Vec<f64>], y: &[Vec<f64>], w: &[Vec<f64>], lambda: f64) -> f64 {
    let n = x.len();
    let p = x[0].len();
    let t = y[0].len();
    let mut num = 0.0;
    let mut den = 0.0;
    for a in 0..p {
        for c in 0..t {
            let xty: f64 = (0..n).map(|i| x[i][a] * y[i][c]).sum();
            let mut lhs = lambda * w[a][c];
            for b in 0..p {
                let g: f64 = (0..n).map(|i| x[i][a] * x[i][b]).sum();
                lhs += g * w[b][c];
            }
            num += (lhs - xty).powi(2);
            den += xty * xty;
        }
    }
    (num / den).sqrt()
}

/// Worst relative normal-equation residual over random tall and wide problems.
pub fn ridge_oracle_max_residual(problems: usize, seed: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for t in 0..problems as u64 {
        let mut r = rng(seed.wrapping_add(t));
        let (n, p) = if t % 2 == 0 {
            (r.gen_range(20..60), r.gen_range(2..15))
        } else {
            (r.gen_range(5..20), r.gen_range(25..60))
        };
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| r.sample(StandardNormal)).collect()).collect();
        let y: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let lambda = 10f64.powf(r.gen_range(-3.0..3.0));
        let w = wfid::seqclf::ridge::solve_dense(&x, &y, lambda).unwrap();
        worst = worst.max(normal_equation_residual(&x, &y, &w, lambda));
    }
    worst
}

// --------------------------------------------------------------------- ROCKET

/// `(max, ppv)` by materializing the zero-padded input and sliding the dilated kernel.
pub fn direct_convolution(kernel: &RocketKernel, x: &[f64]) -> (f64, f64) {
    let mut padded = vec![0.0; kernel.padding];
    padded.extend_from_slice(x);
    padded.extend(std::iter::repeat(0.0).take(kernel.padding));
    let span = (kernel.weights.len() - 1) * kernel.dilation + 1;
    let outputs: Vec<f64> = (0..=padded.len() - span)
        .map(|i| {
            kernel.bias
                + kernel
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * padded[i + j * kernel.dilation])
                    .sum::<f64>()
        })
        .collect();
    let max = outputs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ppv = outputs.iter().filter(|&&v| v > 0.0).count() as f64 / outputs.len() as f64;
    (max, ppv)
}

/// Worst absolute deviation of `apply_kernel` from the direct convolution over
/// `pairs` random (kernel, trace) pairs.
pub fn rocket_oracle_max_error(pairs: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for t in 0..pairs as u64 {
        let length = r.gen_range(11..80);
        let kernel = sample_kernels(1, length, seed.wrapping_add(t)).unwrap().remove(0);
        let trace: Vec<f64> = (0..length).map(|_| r.gen_range(-3.0..3.0)).collect();
        let (m, p) = apply_kernel(&kernel, &trace);
        let (em, ep) = direct_convolution(&kernel, &trace);
        worst = worst.max((m - em).abs()).max((p - ep).abs());
    }
    worst
}

// --------------------------------------------------------------------- splits

/// Checks that a k-part plan partitions `0..n` and that every part holds
/// `count_c / k` of each class within 1. Returns a description of the first violation.
pub fn check_stratified_partition(plan: &SplitPlan, labels: &[usize], classes: usize) -> Result<(), String> {
    let k = plan.num_parts();
    let mut seen = vec![0usize; labels.len()];
    let mut per_part = vec![vec![0usize; classes]; k];
    for part in 0..k {
        for i in plan.part(part) {
            if i >= labels.len() {
                return Err(format!("index {i} out of range"));
            }
            seen[i] += 1;
            per_part[part][labels[i]] += 1;
        }
    }
    if let Some(i) = seen.iter().position(|&s| s != 1) {
        return Err(format!("index {i} appears {} times", seen[i]));
    }
    let mut totals = vec![0usize; classes];
    labels.iter().for_each(|&c| totals[c] += 1);
    for (part, counts) in per_part.iter().enumerate() {
        for c in 0..classes {
            let ideal = totals[c] as f64 / k as f64;
            if (counts[c] as f64 - ideal).abs() > 1.0 {
                return Err(format!("part {part} holds {} of class {c}, ideal {ideal}", counts[c]));
            }
        }
    }
    Ok(())
}

/// Runs `cases` random (dataset, k, seed) triples through `stratified_kfold`.
pub fn split_invariant_failures(cases: usize, seed: u64) -> Vec<String> {
    let mut r = rng(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let classes = r.gen_range(2..6);
        let k = r.gen_range(2..11);
        // Every class needs at least k members.
        let n = r.gen_range(k * classes..=300);
        let labels: Vec<usize> = (0..n)
            .map(|i| if i < k * classes { i % classes } else { r.gen_range(0..classes) })
            .collect();
        let ds = labelled(&labels, classes);
        let split_seed: u64 = r.gen();
        match wfid::stratified_kfold(&ds, k, split_seed) {
            Ok(plan) => {
                if let Err(e) = check_stratified_partition(&plan, &labels, classes) {
                    failures.push(format!("n={n} k={k} seed={split_seed}: {e}"));
                }
            }
            Err(e) => failures.push(format!("n={n} k={k} seed={split_seed}: {e}")),
        }
    }
    failures
}
