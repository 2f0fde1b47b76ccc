use rand::seq::SliceRandom;

use super::metrics::accuracy;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::TrainedModel;
use crate::rng::stream;

pub const PERMUTATION_SHUFFLES: usize = 5;

/// Mean accuracy drop (percentage points) when one attribute's values are
/// shuffled across the `test` records, over five shuffles per attribute.
///
/// A shuffle that happens to leave every record in place is redrawn, so each
/// of the five permutations differs from the identity.
pub fn permutation_importance(
    model: &TrainedModel,
    dataset: &LabeledDataset,
    test: &[usize],
    seed: u64,
) -> Result<Vec<f64>> {
    if test.is_empty() {
        return Err(Error::InvalidInput("permutation importance needs test records".into()));
    }
    let truth: Vec<usize> = test.iter().map(|&i| dataset.label(i)).collect();
    let rows: Vec<Vec<f64>> = test.iter().map(|&i| dataset.features(i).to_vec()).collect();
    let predict_all = |rows: &[Vec<f64>]| -> Result<Vec<usize>> { rows.iter().map(|r| model.predict(r)).collect() };
    let base = accuracy(&predict_all(&rows)?, &truth)?;
    let d = dataset.num_attributes();
    let identity: Vec<usize> = (0..test.len()).collect();
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let mut drop = 0.0;
        for s in 0..PERMUTATION_SHUFFLES {
            let mut rng = stream(seed, &[j as u64, s as u64]);
            let mut perm = identity.clone();
            if perm.len() > 1 {
                while perm == identity {
                    perm.shuffle(&mut rng);
                }
            }
            let mut shuffled = rows.clone();
            for (r, &p) in perm.iter().enumerate() {
                shuffled[r][j] = rows[p][j];
            }
            drop += base - accuracy(&predict_all(&shuffled)?, &truth)?;
        }
        out.push(drop / PERMUTATION_SHUFFLES as f64);
    }
    Ok(out)
}
