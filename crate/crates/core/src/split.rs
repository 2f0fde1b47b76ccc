//! Stratified k-fold and hold-out splitting.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng;

/// Assignment of a set of record indices to disjoint parts (folds or hold-out partitions).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    indices: Vec<usize>,
    assignments: Vec<usize>,
    num_parts: usize,
    pub seed: u64,
}

impl SplitPlan {
    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    /// Record indices covered by the plan, in ascending order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Part index of each covered record, parallel to [`SplitPlan::indices`].
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Record indices assigned to `part`, ascending.
    pub fn part(&self, part: usize) -> Vec<usize> {
        self.indices
            .iter()
            .zip(&self.assignments)
            .filter(|(_, a)| **a == part)
            .map(|(i, _)| *i)
            .collect()
    }

    /// Record indices not assigned to `part`, ascending (the training side of a fold).
    pub fn complement(&self, part: usize) -> Vec<usize> {
        self.indices
            .iter()
            .zip(&self.assignments)
            .filter(|(_, a)| **a != part)
            .map(|(i, _)| *i)
            .collect()
    }
}

/// Groups `indices` by label, each group in ascending index order.
fn by_class(labels: &[usize], indices: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let num_classes = indices.iter().map(|&i| labels[i] + 1).max().unwrap_or(0);
    let mut groups = vec![Vec::new(); num_classes];
    for &i in indices {
        groups[labels[i]].push(i);
    }
    groups
        .into_iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .collect()
}

fn plan_from(mut pairs: Vec<(usize, usize)>, num_parts: usize, seed: u64) -> SplitPlan {
    pairs.sort_unstable();
    let (indices, assignments) = pairs.into_iter().unzip();
    SplitPlan {
        indices,
        assignments,
        num_parts,
        seed,
    }
}

/// Stratified k-fold assignment over the whole dataset.
pub fn stratified_kfold(dataset: &LabeledDataset, k: usize, seed: u64) -> Result<SplitPlan> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    stratified_kfold_subset(&dataset.labels(), &all, k, seed)
}

/// Stratified k-fold assignment of the records in `indices`.
///
/// Each class is shuffled and dealt round-robin, continuing from where the
/// previous class stopped, so per-fold class counts differ from the
/// proportional share by less than one.
pub fn stratified_kfold_subset(
    labels: &[usize],
    indices: &[usize],
    k: usize,
    seed: u64,
) -> Result<SplitPlan> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let mut pairs = Vec::with_capacity(indices.len());
    let mut offset = 0;
    for (class, mut members) in by_class(labels, indices) {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                required: k,
            });
        }
        members.shuffle(&mut rng::stream(seed, &[class as u64]));
        for (j, &i) in members.iter().enumerate() {
            pairs.push((i, (offset + j) % k));
        }
        offset = (offset + members.len()) % k;
    }
    Ok(plan_from(pairs, k, seed))
}

/// Stratified hold-out over the whole dataset.
pub fn stratified_holdout(dataset: &LabeledDataset, fractions: &[f64], seed: u64) -> Result<SplitPlan> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    stratified_holdout_subset(&dataset.labels(), &all, fractions, seed)
}

/// Per-class proportional allocation with largest-remainder rounding.
pub fn stratified_holdout_subset(
    labels: &[usize],
    indices: &[usize],
    fractions: &[f64],
    seed: u64,
) -> Result<SplitPlan> {
    if fractions.is_empty() {
        return Err(Error::InvalidFractions("no fractions given".into()));
    }
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0) || !f.is_finite()) {
        return Err(Error::InvalidFractions(format!("fraction {f} must be positive")));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidFractions(format!("fractions sum to {total}, expected 1")));
    }
    let mut pairs = Vec::with_capacity(indices.len());
    for (class, mut members) in by_class(labels, indices) {
        let quotas = largest_remainder(members.len(), fractions);
        members.shuffle(&mut rng::stream(seed, &[class as u64]));
        let mut it = members.into_iter();
        for (part, q) in quotas.into_iter().enumerate() {
            pairs.extend(it.by_ref().take(q).map(|i| (i, part)));
        }
    }
    Ok(plan_from(pairs, fractions.len(), seed))
}

/// Splits `n` items by `fractions`; leftover units go to the largest fractional
/// remainders, ties to the lower part index.
pub(crate) fn largest_remainder(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &p in order.iter().take(n.saturating_sub(assigned)) {
        quotas[p] += 1;
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(counts: &[usize]) -> Vec<usize> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat(c).take(n))
            .collect()
    }

    fn per_part_counts(plan: &SplitPlan, labels: &[usize], classes: usize) -> Vec<Vec<usize>> {
        (0..plan.num_parts())
            .map(|p| {
                let mut c = vec![0; classes];
                for i in plan.part(p) {
                    c[labels[i]] += 1;
                }
                c
            })
            .collect()
    }

    #[test]
    fn exact_divisibility() {
        let y = labels(&[10, 10]);
        let all: Vec<usize> = (0..y.len()).collect();
        let plan = stratified_kfold_subset(&y, &all, 5, 1).unwrap();
        for c in per_part_counts(&plan, &y, 2) {
            assert_eq!(c, vec![2, 2]);
        }
    }

    #[test]
    fn remainder_goes_to_one_fold() {
        let y = labels(&[11, 10]);
        let all: Vec<usize> = (0..y.len()).collect();
        let plan = stratified_kfold_subset(&y, &all, 5, 9).unwrap();
        let counts = per_part_counts(&plan, &y, 2);
        assert_eq!(counts.iter().filter(|c| c[0] == 3).count(), 1);
        assert!(counts.iter().all(|c| (2..=3).contains(&c[0]) && c[1] == 2));
        assert_eq!(plan, stratified_kfold_subset(&y, &all, 5, 9).unwrap());
    }

    #[test]
    fn small_class_is_named() {
        let y = labels(&[10, 3]);
        let all: Vec<usize> = (0..y.len()).collect();
        match stratified_kfold_subset(&y, &all, 5, 0) {
            Err(Error::ClassTooSmall { class: 1, count: 3, required: 5 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn holdout_allocation() {
        let y = labels(&[100, 100]);
        let all: Vec<usize> = (0..y.len()).collect();
        let plan = stratified_holdout_subset(&y, &all, &[0.5, 0.5], 3).unwrap();
        assert_eq!(per_part_counts(&plan, &y, 2), vec![vec![50, 50], vec![50, 50]]);

        assert_eq!(largest_remainder(40, &[0.45, 0.05, 0.5]), vec![18, 2, 20]);

        let y = labels(&[7]);
        let all: Vec<usize> = (0..7).collect();
        let plan = stratified_holdout_subset(&y, &all, &[1.0], 3).unwrap();
        assert_eq!(plan.part(0), all);
    }

    #[test]
    fn holdout_rejects_bad_fractions() {
        let y = labels(&[4]);
        let all: Vec<usize> = (0..4).collect();
        assert!(stratified_holdout_subset(&y, &all, &[0.0, 1.0], 0).is_err());
        assert!(stratified_holdout_subset(&y, &all, &[-0.5, 1.5], 0).is_err());
        assert!(stratified_holdout_subset(&y, &all, &[0.5, 0.4], 0).is_err());
    }
}
