//! 802.11n style CSI amplitude traces from per-device multipath channels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{CsiTrace, LabeledDataset};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Subcarrier budget of a 20 MHz OFDM symbol.
pub const MAX_SUBCARRIERS: usize = 64;

const MIN_PATHS: usize = 3;
const MAX_PATHS: usize = 8;
const MAX_PROFILE_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    /// Excess delay in seconds.
    pub delay: f64,
    pub gain_re: f64,
    pub gain_im: f64,
}

impl PathComponent {
    pub fn new(delay: f64, gain: Complex64) -> Self {
        Self {
            delay,
            gain_re: gain.re,
            gain_im: gain.im,
        }
    }

    pub fn gain(&self) -> Complex64 {
        Complex64::new(self.gain_re, self.gain_im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipathProfile {
    pub paths: Vec<PathComponent>,
}

impl MultipathProfile {
    pub fn validate(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(Error::InvalidScenario("multipath profile has no paths".into()));
        }
        if self.paths.iter().any(|p| !(p.delay >= 0.0) || !p.gain().is_finite()) {
            return Err(Error::InvalidScenario("path delays must be non-negative and gains finite".into()));
        }
        if self.paths.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::InvalidScenario("path delays must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            paths: self
                .paths
                .iter()
                .map(|p| PathComponent::new(p.delay, p.gain() * alpha))
                .collect(),
        }
    }
}

/// Frequency response `H[k] = Σ_p g_p · exp(−i·2π·k·Δf·τ_p)` at subcarrier `k`.
pub fn channel_response(profile: &MultipathProfile, subcarrier: i32, spacing_hz: f64) -> Complex64 {
    response_with(profile.paths.iter().map(|p| (p.delay, p.gain())), subcarrier, spacing_hz)
}

fn response_with(paths: impl Iterator<Item = (f64, Complex64)>, subcarrier: i32, spacing_hz: f64) -> Complex64 {
    let omega = -2.0 * PI * subcarrier as f64 * spacing_hz;
    paths
        .map(|(delay, gain)| gain * Complex64::from_polar(1.0, omega * delay))
        .sum()
}

/// Signed subcarrier indices of a trace of `length` amplitudes, DC excluded:
/// `−⌈L/2⌉..=−1` followed by `1..=⌊L/2⌋`.
pub fn data_subcarriers(length: usize) -> Vec<i32> {
    let neg = length.div_ceil(2) as i32;
    let pos = (length / 2) as i32;
    (-neg..=-1).chain(1..=pos).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsiScenario {
    pub num_devices: usize,
    pub packets_per_device: usize,
    pub trace_length: usize,
    pub subcarrier_spacing_hz: f64,
    /// Stddev of the per-packet multiplicative complex jitter on each path gain.
    pub jitter_std: f64,
    /// Stddev of additive amplitude noise.
    pub noise_std: f64,
    /// Largest excess delay of sampled profiles, seconds.
    pub max_delay_s: f64,
    /// RMS delay spread of the exponential power-delay profile, seconds.
    pub delay_spread_s: f64,
    /// Required separation of noiseless traces between any two devices, in units of `noise_std`.
    pub separation_margin: f64,
    /// Explicit per-device profiles; empty means sample them from the seed.
    pub profiles: Vec<MultipathProfile>,
}

impl Default for CsiScenario {
    fn default() -> Self {
        Self {
            num_devices: 20,
            packets_per_device: 1236,
            trace_length: 52,
            subcarrier_spacing_hz: 312_500.0,
            jitter_std: 0.3,
            noise_std: 0.08,
            max_delay_s: 400e-9,
            delay_spread_s: 100e-9,
            separation_margin: 8.0,
            profiles: Vec::new(),
        }
    }
}

impl CsiScenario {
    pub fn validate(&self) -> Result<()> {
        if self.num_devices == 0 || self.packets_per_device == 0 || self.trace_length == 0 {
            return Err(Error::InvalidScenario(
                "num_devices, packets_per_device and trace_length must be positive".into(),
            ));
        }
        if self.trace_length > MAX_SUBCARRIERS {
            return Err(Error::InvalidScenario(format!(
                "trace_length {} exceeds the {MAX_SUBCARRIERS}-subcarrier budget",
                self.trace_length
            )));
        }
        if !(self.subcarrier_spacing_hz > 0.0) || !(self.max_delay_s > 0.0) || !(self.delay_spread_s > 0.0) {
            return Err(Error::InvalidScenario("spacing, max delay and delay spread must be positive".into()));
        }
        if !(self.jitter_std >= 0.0) || !(self.noise_std >= 0.0) || !(self.separation_margin >= 0.0) {
            return Err(Error::InvalidScenario("jitter, noise and margin must be non-negative".into()));
        }
        if !self.profiles.is_empty() {
            if self.profiles.len() != self.num_devices {
                return Err(Error::InvalidScenario(format!(
                    "{} profiles given for {} devices",
                    self.profiles.len(),
                    self.num_devices
                )));
            }
            for p in &self.profiles {
                p.validate()?;
            }
        }
        Ok(())
    }

    /// Noiseless amplitude trace `|H[k]|` of `profile` over the data subcarriers.
    pub fn clean_trace(&self, profile: &MultipathProfile) -> Vec<f64> {
        data_subcarriers(self.trace_length)
            .into_iter()
            .map(|k| channel_response(profile, k, self.subcarrier_spacing_hz).norm())
            .collect()
    }

    /// The scenario's profiles, sampling them from `seed` when none are given.
    ///
    /// Sampled profiles are accepted only if their noiseless trace differs from
    /// every earlier device's by more than `separation_margin × noise_std` on
    /// some subcarrier.
    pub fn resolve_profiles(&self, seed: u64) -> Result<Vec<MultipathProfile>> {
        self.validate()?;
        if !self.profiles.is_empty() {
            return Ok(self.profiles.clone());
        }
        let margin = self.separation_margin * self.noise_std;
        let mut rng = rng::stream(seed, &[2]);
        let mut profiles: Vec<MultipathProfile> = Vec::with_capacity(self.num_devices);
        let mut traces: Vec<Vec<f64>> = Vec::with_capacity(self.num_devices);
        for d in 0..self.num_devices {
            let mut attempts = 0;
            loop {
                attempts += 1;
                if attempts > MAX_PROFILE_ATTEMPTS {
                    return Err(Error::InvalidScenario(format!(
                        "could not place device {d} with the requested separation margin"
                    )));
                }
                let profile = self.sample_profile(&mut rng);
                let trace = self.clean_trace(&profile);
                let separated = traces.iter().all(|other| max_abs_diff(other, &trace) > margin);
                if separated {
                    profiles.push(profile);
                    traces.push(trace);
                    break;
                }
            }
        }
        Ok(profiles)
    }

    fn sample_profile(&self, rng: &mut StreamRng) -> MultipathProfile {
        let count = rng.gen_range(MIN_PATHS..=MAX_PATHS);
        let mut delays: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..self.max_delay_s)).collect();
        delays.sort_by(f64::total_cmp);
        delays.dedup();
        let mut paths: Vec<PathComponent> = delays
            .into_iter()
            .map(|delay| {
                let scale = (-delay / self.delay_spread_s).exp().sqrt() / std::f64::consts::SQRT_2;
                let g = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * scale;
                PathComponent::new(delay, g)
            })
            .collect();
        let power: f64 = paths.iter().map(|p| p.gain().norm_sqr()).sum();
        let norm = power.sqrt().max(f64::MIN_POSITIVE);
        for p in &mut paths {
            let g = p.gain() / norm;
            *p = PathComponent::new(p.delay, g);
        }
        MultipathProfile { paths }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One trace per packet, device-major; device `d` sits at location `d`.
pub fn gen_csi_dataset(scenario: &CsiScenario, seed: u64) -> Result<LabeledDataset> {
    let profiles = scenario.resolve_profiles(seed)?;
    let subcarriers = data_subcarriers(scenario.trace_length);
    let spacing = scenario.subcarrier_spacing_hz;

    let per_device: Vec<Result<Vec<CsiTrace>>> = profiles
        .par_iter()
        .enumerate()
        .map(|(d, profile)| {
            let mut rng = rng::stream(seed, &[1, d as u64]);
            let mut out = Vec::with_capacity(scenario.packets_per_device);
            for _ in 0..scenario.packets_per_device {
                let gains: Vec<(f64, Complex64)> = profile
                    .paths
                    .iter()
                    .map(|p| {
                        let eps = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                            * (scenario.jitter_std / std::f64::consts::SQRT_2);
                        (p.delay, p.gain() * (Complex64::new(1.0, 0.0) + eps))
                    })
                    .collect();
                let amplitudes = subcarriers
                    .iter()
                    .map(|&k| {
                        let h = response_with(gains.iter().copied(), k, spacing).norm();
                        let noise: f64 = rng.sample(StandardNormal);
                        (h + scenario.noise_std * noise).max(0.0)
                    })
                    .collect();
                out.push(CsiTrace::new(amplitudes, d, d)?);
            }
            Ok(out)
        })
        .collect();

    let mut records = Vec::with_capacity(scenario.num_devices * scenario.packets_per_device);
    for device in per_device {
        records.extend(device?);
    }
    LabeledDataset::sequence(records, scenario.num_devices, scenario.trace_length)
}
