//! Principal-component projection for plotting.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::standardize::StandardizationParams;

pub const TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// Unit-norm principal axes, largest variance first.
    pub components: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    /// Per-record coordinates along `components`.
    pub coordinates: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(c: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    c.iter().map(|row| dot(row, v)).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let p = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
    }
}

/// Top eigenpair of a symmetric matrix by power iteration, restricted to the
/// orthogonal complement of `basis`.
fn power_iteration(c: &[Vec<f64>], start: Vec<f64>, basis: &[Vec<f64>], scale: f64) -> Result<(f64, Vec<f64>)> {
    let mut v = start;
    orthogonalize(&mut v, basis);
    normalize(&mut v);
    for _ in 0..MAX_ITERATIONS {
        let mut w = mat_vec(c, &v);
        orthogonalize(&mut w, basis);
        let lambda = dot(&w, &v);
        let residual: f64 = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= TOLERANCE * scale {
            return Ok((lambda, v));
        }
        if normalize(&mut w) == 0.0 {
            return Ok((0.0, v));
        }
        v = w;
    }
    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Projects onto the top `dims` principal components (any `dims` up to the
/// attribute count; only an entirely constant dataset is rejected). Components are sign-fixed so the largest-magnitude
/// loading is positive.
pub fn pca(dataset: &LabeledDataset, dims: usize) -> Result<Projection> {
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let d = dataset.num_attributes();
    if dims == 0 || dims > d {
        return Err(Error::InvalidInput(format!("cannot project {d} attributes onto {dims} dimensions")));
    }
    let all: Vec<usize> = (0..n).collect();
    let stats = StandardizationParams::fit(dataset, &all)?;
    if stats.constant_attributes().len() == d {
        return Err(Error::NoVariance);
    }
    let mean = stats.means.clone();
    let mut cov = vec![vec![0.0; d]; d];
    for i in 0..n {
        let x = dataset.features(i);
        for a in 0..d {
            let da = x[a] - mean[a];
            for b in a..d {
                cov[a][b] += da * (x[b] - mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= n as f64;
            cov[b][a] = cov[a][b];
        }
    }
    let scale = (0..d).map(|a| cov[a][a]).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut rng = stream(0, &[]);
    let mut components = Vec::with_capacity(dims);
    let mut variances = Vec::with_capacity(dims);
    for _ in 0..dims {
        let start: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (lambda, mut v) = power_iteration(&cov, start, &components, scale)?;
        let lead = v
            .iter()
            .enumerate()
            .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        for a in 0..d {
            for b in 0..d {
                cov[a][b] -= lambda * v[a] * v[b];
            }
        }
        components.push(v);
        variances.push(lambda);
    }
    let coordinates = (0..n)
        .map(|i| {
            let centered: Vec<f64> = dataset.features(i).iter().zip(&mean).map(|(x, m)| x - m).collect();
            components.iter().map(|c| dot(c, &centered)).collect()
        })
        .collect();
    Ok(Projection {
        mean,
        components,
        variances,
        coordinates,
        labels: dataset.labels(),
    })
}

/// Two- or three-dimensional projection for plotting.
pub fn pca_project(dataset: &LabeledDataset, dims: usize) -> Result<Projection> {
    if !(2..=3).contains(&dims) {
        return Err(Error::InvalidInput(format!("projection dimensions must be 2 or 3, got {dims}")));
    }
    let all: Vec<usize> = (0..dataset.len()).collect();
    if !dataset.is_empty() {
        let stats = StandardizationParams::fit(dataset, &all)?;
        if dataset.num_attributes() - stats.constant_attributes().len() < dims {
            return Err(Error::NoVariance);
        }
    }
    pca(dataset, dims)
}

/// `device_id,c1,c2[,c3]` lines with a header.
pub fn write_projection<W: std::io::Write>(projection: &Projection, mut out: W) -> std::io::Result<()> {
    let dims = projection.components.len();
    let header: Vec<String> = std::iter::once("device_id".to_string())
        .chain((1..=dims).map(|c| format!("c{c}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (label, coords) in projection.labels.iter().zip(&projection.coordinates) {
        let fields: Vec<String> = coords.iter().map(|c| format!("{c:?}")).collect();
        writeln!(out, "{label},{}", fields.join(","))?;
    }
    Ok(())
}
