//! NB-IoT style radio metrics: one multivariate Gaussian cluster per device.

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, TabularFingerprint, NUM_TABULAR_ATTRIBUTES, RSRQ, SIGNAL_POWER, TOTAL_POWER};
use crate::error::{Error, Result};
use crate::rng;

const D: usize = NUM_TABULAR_ATTRIBUTES;

pub type MeanVector = [f64; D];
pub type Covariance = [[f64; D]; D];

/// Mean of the first device in dB-scale units (RSRP, RSSI, RSRQ, SNR, last-packet energy).
const BASE_MEAN: MeanVector = [-104.0, -72.0, -10.5, 7.0, 15.0];

/// Signal-power step between consecutive devices.
const SIGNAL_STEP: f64 = 8.0;

/// Total-power offset separating the last device from its signal-power twin.
const TWIN_OFFSET: f64 = 3.5;

/// Small per-attribute steps for RSSI, RSRQ, SNR and last-packet energy.
const MINOR_STEP: [f64; 4] = [0.8, 0.25, 0.8, 0.6];

const STDDEV: MeanVector = [1.5, 1.6, 0.5, 1.5, 1.2];

/// Shared fading makes signal and total power move together within a device.
const CORRELATION: Covariance = [
    [1.0, 0.95, 0.2, 0.4, 0.5],
    [0.95, 1.0, 0.1, 0.35, 0.5],
    [0.2, 0.1, 1.0, 0.3, 0.0],
    [0.4, 0.35, 0.3, 1.0, 0.1],
    [0.5, 0.5, 0.0, 0.1, 1.0],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbIotScenario {
    pub num_devices: usize,
    pub packets_per_device: usize,
    /// Explicit per-device means; empty selects the built-in placement.
    pub device_means: Vec<MeanVector>,
    /// Explicit per-device covariances; empty selects the built-in shared covariance.
    pub device_covariances: Vec<Covariance>,
    /// Multiplies the spread of device means around their centroid.
    pub separability: f64,
}

impl Default for NbIotScenario {
    fn default() -> Self {
        Self {
            num_devices: 5,
            packets_per_device: 1085,
            device_means: Vec::new(),
            device_covariances: Vec::new(),
            separability: 1.0,
        }
    }
}

impl NbIotScenario {
    /// Device means after placement and separability scaling.
    pub fn resolved_means(&self) -> Vec<MeanVector> {
        let base: Vec<MeanVector> = if self.device_means.is_empty() {
            (0..self.num_devices).map(|d| placed_mean(d, self.num_devices)).collect()
        } else {
            self.device_means.clone()
        };
        let n = base.len().max(1) as f64;
        let mut centroid = [0.0; D];
        for m in &base {
            for j in 0..D {
                centroid[j] += m[j] / n;
            }
        }
        base.iter()
            .map(|m| std::array::from_fn(|j| centroid[j] + self.separability * (m[j] - centroid[j])))
            .collect()
    }

    pub fn resolved_covariances(&self) -> Vec<Covariance> {
        if self.device_covariances.is_empty() {
            let cov = std::array::from_fn(|i| std::array::from_fn(|j| CORRELATION[i][j] * STDDEV[i] * STDDEV[j]));
            vec![cov; self.num_devices]
        } else {
            self.device_covariances.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_devices == 0 || self.packets_per_device == 0 {
            return Err(Error::InvalidScenario("num_devices and packets_per_device must be positive".into()));
        }
        if !(self.separability >= 0.0) {
            return Err(Error::InvalidScenario("separability must be non-negative".into()));
        }
        if !self.device_means.is_empty() && self.device_means.len() != self.num_devices {
            return Err(Error::InvalidScenario(format!(
                "{} device means given for {} devices",
                self.device_means.len(),
                self.num_devices
            )));
        }
        if !self.device_covariances.is_empty() && self.device_covariances.len() != self.num_devices {
            return Err(Error::InvalidScenario(format!(
                "{} covariances given for {} devices",
                self.device_covariances.len(),
                self.num_devices
            )));
        }
        for cov in self.resolved_covariances() {
            for i in 0..D {
                for j in 0..D {
                    if (cov[i][j] - cov[j][i]).abs() > 1e-12 {
                        return Err(Error::InvalidScenario("covariance is not symmetric".into()));
                    }
                }
            }
            sqrt_factor(&cov)?;
        }
        Ok(())
    }
}

/// Built-in mean placement.
///
/// Devices are spaced along signal power, except that the last device shares
/// the signal power of its predecessor and differs mainly in total power. The
/// remaining attributes get small offsets following permutations of the
/// device order.
fn placed_mean(d: usize, n: usize) -> MeanVector {
    let twin = n >= 2 && d == n - 1;
    let rank = if twin { d - 1 } else { d };
    let perm = |mult: usize, shift: usize| ((d * mult + shift) % n) as f64 - (n as f64 - 1.0) / 2.0;
    let minor = [perm(2, 1), perm(3, 1), perm(4, 2), perm(3, 2)];
    let mut mean = BASE_MEAN;
    mean[SIGNAL_POWER] += SIGNAL_STEP * rank as f64;
    for j in 1..D {
        mean[j] += MINOR_STEP[j - 1] * minor[j - 1];
    }
    if twin {
        let prev = placed_mean(d - 1, n);
        mean[TOTAL_POWER] = prev[TOTAL_POWER] + TWIN_OFFSET;
        mean[RSRQ] = prev[RSRQ];
    }
    mean
}

/// Symmetric square root `V·sqrt(Λ)` of a PSD covariance.
fn sqrt_factor(cov: &Covariance) -> Result<Covariance> {
    let m = Mat::<f64>::from_fn(D, D, |i, j| cov[i][j]);
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidScenario(format!("eigendecomposition failed: {e:?}")))?;
    let values = eig.S().column_vector();
    let vectors = eig.U();
    let min = (0..D).map(|i| values[i]).fold(f64::INFINITY, f64::min);
    if min < -1e-9 {
        return Err(Error::NotPsd(min));
    }
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| vectors[(i, j)] * values[j].max(0.0).sqrt())
    }))
}

/// Draws `packets_per_device` fingerprints per device, device-major order.
///
/// Samples violating `total_power >= signal_power` are re-drawn.
pub fn gen_nbiot_dataset(scenario: &NbIotScenario, seed: u64) -> Result<LabeledDataset> {
    scenario.validate()?;
    let means = scenario.resolved_means();
    let factors = scenario
        .resolved_covariances()
        .iter()
        .map(sqrt_factor)
        .collect::<Result<Vec<_>>>()?;

    let per_device: Vec<Result<Vec<TabularFingerprint>>> = (0..scenario.num_devices)
        .into_par_iter()
        .map(|d| {
            let mut rng = rng::stream(seed, &[0, d as u64]);
            let mut out = Vec::with_capacity(scenario.packets_per_device);
            let mut redraws = 0usize;
            while out.len() < scenario.packets_per_device {
                let z: [f64; D] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let x: [f64; D] = std::array::from_fn(|i| {
                    means[d][i] + (0..D).map(|j| factors[d][i][j] * z[j]).sum::<f64>()
                });
                if x[TOTAL_POWER] < x[SIGNAL_POWER] {
                    redraws += 1;
                    if redraws > 1000 * scenario.packets_per_device {
                        return Err(Error::InvalidScenario(format!(
                            "device {d}: total_power >= signal_power is almost never satisfied"
                        )));
                    }
                    continue;
                }
                out.push(TabularFingerprint::new(x, d)?);
            }
            Ok(out)
        })
        .collect();

    let mut records = Vec::with_capacity(scenario.num_devices * scenario.packets_per_device);
    for device in per_device {
        records.extend(device?);
    }
    LabeledDataset::tabular(records, scenario.num_devices)
}
