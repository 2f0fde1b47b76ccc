//! Random convolutional kernel transform.
//!
//! Each kernel is a dilated, optionally zero-padded convolution with random
//! mean-centered weights and a random bias. A trace is summarized per kernel by
//! the maximum output and the proportion of strictly positive outputs (PPV).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_KERNELS: usize = 10_000;
pub const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];
pub const MIN_INPUT_LENGTH: usize = 11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocketKernel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub padding: usize,
}

impl RocketKernel {
    /// Receptive field `(len − 1)·dilation + 1`.
    pub fn span(&self) -> usize {
        (self.weights.len() - 1) * self.dilation + 1
    }

    /// Number of convolution outputs for an input of `input_length`.
    pub fn output_length(&self, input_length: usize) -> usize {
        (input_length + 2 * self.padding + 1).saturating_sub(self.span())
    }
}

/// Samples `count` kernels for inputs of `input_length`.
pub fn sample_kernels(count: usize, input_length: usize, seed: u64) -> Result<Vec<RocketKernel>> {
    if input_length < MIN_INPUT_LENGTH {
        return Err(Error::InvalidInput(format!(
            "input length {input_length} is shorter than the minimum {MIN_INPUT_LENGTH}"
        )));
    }
    let mut rng = rng::stream(seed, &[]);
    let kernels = (0..count)
        .map(|_| {
            let len = KERNEL_LENGTHS[rng.gen_range(0..KERNEL_LENGTHS.len())];
            let mut weights: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            let mean = weights.iter().sum::<f64>() / len as f64;
            weights.iter_mut().for_each(|w| *w -= mean);
            let bias = rng.gen_range(-1.0..=1.0);
            let max_exponent = ((input_length - 1) as f64 / (len - 1) as f64).log2();
            let dilation = (2f64.powf(rng.gen_range(0.0..=max_exponent)) as usize).max(1);
            let padding = if rng.gen_bool(0.5) { (len - 1) * dilation / 2 } else { 0 };
            RocketKernel {
                weights,
                bias,
                dilation,
                padding,
            }
        })
        .collect();
    Ok(kernels)
}

/// `(max, ppv)` of the kernel's outputs over the zero-padded input.
pub fn apply_kernel(kernel: &RocketKernel, x: &[f64]) -> (f64, f64) {
    let len = x.len() as isize;
    let out_len = kernel.output_length(x.len());
    let pad = kernel.padding as isize;
    let dil = kernel.dilation as isize;
    let mut max = f64::NEG_INFINITY;
    let mut positive = 0usize;
    for i in 0..out_len as isize {
        let start = i - pad;
        let mut s = kernel.bias;
        for (j, w) in kernel.weights.iter().enumerate() {
            let idx = start + j as isize * dil;
            if idx >= 0 && idx < len {
                s += w * x[idx as usize];
            }
        }
        if s > max {
            max = s;
        }
        if s > 0.0 {
            positive += 1;
        }
    }
    (max, positive as f64 / out_len as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocketTransform {
    pub kernels: Vec<RocketKernel>,
    pub input_length: usize,
}

impl RocketTransform {
    pub fn new(count: usize, input_length: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            kernels: sample_kernels(count, input_length, seed)?,
            input_length,
        })
    }

    pub fn num_features(&self) -> usize {
        2 * self.kernels.len()
    }

    /// Feature vector `[max_0, ppv_0, max_1, ppv_1, ...]`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_length {
            return Err(Error::DimensionMismatch {
                expected: self.input_length,
                found: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.num_features());
        for k in &self.kernels {
            let (max, ppv) = apply_kernel(k, x);
            out.push(max);
            out.push(ppv);
        }
        Ok(out)
    }

    /// Transforms many traces; each trace is independent, so the parallel
    /// result equals the sequential one.
    pub fn transform_many(&self, traces: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        traces.par_iter().map(|x| self.transform(x)).collect()
    }
}
