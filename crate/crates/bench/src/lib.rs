//! Fixtures for the criterion benches.

use wfid::hyper::{HyperValue, Hyperparameters};
use wfid::simgen::{gen_csi_dataset, gen_nbiot_dataset};
use wfid::{stratified_holdout, CsiScenario, LabeledDataset, NbIotScenario};

pub const SEED: u64 = 7;

/// Default NB-IoT dataset with an 80/20 stratified split.
pub fn nbiot() -> (LabeledDataset, Vec<usize>, Vec<usize>) {
    let ds = gen_nbiot_dataset(&NbIotScenario::default(), SEED).expect("default scenario");
    let plan = stratified_holdout(&ds, &[0.8, 0.2], SEED).expect("split");
    let (train, test) = (plan.part(0), plan.part(1));
    (ds, train, test)
}

/// Small CSI dataset: 10 devices, 40 traces each, 50/50 split.
pub fn csi() -> (LabeledDataset, Vec<usize>, Vec<usize>) {
    let scenario = CsiScenario {
        num_devices: 10,
        packets_per_device: 40,
        ..CsiScenario::default()
    };
    let ds = gen_csi_dataset(&scenario, SEED).expect("csi scenario");
    let plan = stratified_holdout(&ds, &[0.5, 0.5], SEED).expect("split");
    let (train, test) = (plan.part(0), plan.part(1));
    (ds, train, test)
}

pub fn hyper(pairs: &[(&str, i64)]) -> Hyperparameters {
    pairs.iter().map(|(k, v)| (k.to_string(), HyperValue::Int(*v))).collect()
}
