mod support;

use num_complex::Complex64;
use wfid::dataset::{RSRQ, SIGNAL_POWER, TOTAL_POWER};
use wfid::simgen::{channel_response, gen_csi_dataset, gen_nbiot_dataset, MultipathProfile, PathComponent};
use wfid::{CsiScenario, LabeledDataset, NbIotScenario};

fn between_class_variance(ds: &LabeledDataset, attribute: usize) -> f64 {
    let k = ds.num_devices();
    let mut sums = vec![0.0; k];
    let counts = ds.class_counts();
    for i in 0..ds.len() {
        sums[ds.label(i)] += ds.features(i)[attribute];
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let grand = means.iter().sum::<f64>() / k as f64;
    means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (k - 1) as f64
}

#[test]
fn signal_power_has_the_widest_device_spread() {
    let ds = gen_nbiot_dataset(&NbIotScenario::default(), 7).unwrap();
    let signal = between_class_variance(&ds, SIGNAL_POWER);
    let rsrq = between_class_variance(&ds, RSRQ);
    assert!(signal > rsrq, "signal {signal} rsrq {rsrq}");
    for j in 1..5 {
        assert!(signal > between_class_variance(&ds, j), "attribute {j}");
    }
}

#[test]
fn total_power_dominates_signal_power() {
    let ds = gen_nbiot_dataset(&NbIotScenario::default(), 3).unwrap();
    for i in 0..ds.len() {
        let f = ds.features(i);
        assert!(f[TOTAL_POWER] >= f[SIGNAL_POWER]);
    }
}

#[test]
fn indistinguishable_devices_share_the_mean() {
    let mean = [-100.0, -70.0, -10.0, 5.0, 12.0];
    let scenario = NbIotScenario {
        num_devices: 3,
        packets_per_device: 400,
        device_means: vec![mean; 3],
        separability: 0.0,
        ..NbIotScenario::default()
    };
    let ds = gen_nbiot_dataset(&scenario, 2).unwrap();
    let n = ds.len() as f64;
    for (j, &mu) in mean.iter().enumerate() {
        let xs: Vec<f64> = (0..ds.len()).map(|i| ds.features(i)[j]).collect();
        let m = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((m - mu).abs() <= 3.0 * sd / n.sqrt(), "attribute {j}: {m} vs {mu}");
    }
}

#[test]
fn default_csi_profiles_keep_mean_traces_apart() {
    let scenario = CsiScenario {
        packets_per_device: 150,
        ..CsiScenario::default()
    };
    let ds = gen_csi_dataset(&scenario, 7).unwrap();
    let len = ds.num_attributes();
    let k = ds.num_devices();
    let mut means = vec![vec![0.0; len]; k];
    for i in 0..ds.len() {
        for (m, v) in means[ds.label(i)].iter_mut().zip(ds.features(i)) {
            *m += v / scenario.packets_per_device as f64;
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            let gap = means[a].iter().zip(&means[b]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(gap > 5.0 * scenario.noise_std, "devices {a},{b}: {gap}");
        }
    }
}

#[test]
fn csi_locations_are_a_bijection() {
    let scenario = CsiScenario {
        num_devices: 5,
        packets_per_device: 3,
        ..CsiScenario::default()
    };
    let ds = gen_csi_dataset(&scenario, 1).unwrap();
    for t in ds.sequence_records().unwrap() {
        assert_eq!(t.location_id, t.device_id);
        assert!(t.amplitudes().iter().all(|a| *a >= 0.0));
    }
}

#[test]
fn channel_response_is_linear_in_gains() {
    let profile = MultipathProfile {
        paths: vec![
            PathComponent::new(0.0, Complex64::new(0.6, -0.2)),
            PathComponent::new(50e-9, Complex64::new(-0.3, 0.4)),
            PathComponent::new(170e-9, Complex64::new(0.1, 0.1)),
        ],
    };
    let alpha = Complex64::new(-1.3, 0.7);
    let scaled = profile.scaled(alpha);
    for k in -26..=26 {
        let a = channel_response(&scaled, k, 312_500.0);
        let b = alpha * channel_response(&profile, k, 312_500.0);
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn within_device_spread_vanishes_with_noise() {
    let spread = |noise: f64, jitter: f64| {
        let scenario = CsiScenario {
            num_devices: 3,
            packets_per_device: 40,
            noise_std: noise,
            jitter_std: jitter,
            separation_margin: 0.0,
            ..CsiScenario::default()
        };
        let ds = gen_csi_dataset(&scenario, 4).unwrap();
        let rows: Vec<&[f64]> = (0..40).map(|i| ds.features(i)).collect();
        (0..ds.num_attributes())
            .map(|j| {
                let m = rows.iter().map(|r| r[j]).sum::<f64>() / 40.0;
                rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / 40.0
            })
            .sum::<f64>()
    };
    let loud = spread(0.05, 0.1);
    let quiet = spread(0.005, 0.01);
    let silent = spread(0.0, 0.0);
    assert!(loud > quiet && quiet > silent);
    assert!(silent < 1e-20, "{silent}");
}

#[test]
fn generation_is_deterministic() {
    let scenario = CsiScenario {
        num_devices: 4,
        packets_per_device: 10,
        ..CsiScenario::default()
    };
    assert_eq!(gen_csi_dataset(&scenario, 9).unwrap(), gen_csi_dataset(&scenario, 9).unwrap());
    assert_ne!(gen_csi_dataset(&scenario, 9).unwrap(), gen_csi_dataset(&scenario, 10).unwrap());
    let nb = NbIotScenario::default();
    assert_eq!(gen_nbiot_dataset(&nb, 1).unwrap(), gen_nbiot_dataset(&nb, 1).unwrap());
}
