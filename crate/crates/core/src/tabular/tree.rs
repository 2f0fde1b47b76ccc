//! CART trees over presorted columns.
//!
//! Every candidate threshold is the midpoint between two consecutive distinct
//! values of an attribute within a node. Each attribute's sorted index list is
//! partitioned stably as the tree grows, so no re-sorting happens below the root.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    /// Weighted impurity decrease, relative to the root weight.
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub split: Option<Split>,
    /// Class frequencies for classification leaves, `[value]` for regression leaves.
    pub value: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub num_features: usize,
}

impl Tree {
    pub fn leaf(&self, x: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(s) = &node.split {
            node = &self.nodes[if x[s.feature] <= s.threshold { s.left } else { s.right }];
        }
        node
    }

    pub fn value(&self, x: &[f64]) -> &[f64] {
        &self.leaf(x).value
    }

    pub fn num_splits(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_some()).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match &t.nodes[i].split {
                Some(s) => 1 + walk(t, s.left).max(walk(t, s.right)),
                None => 0,
            }
        }
        walk(self, 0)
    }

    /// Per-attribute sum of split gains (unnormalized impurity decrease).
    pub fn gain_by_feature(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_features];
        for s in self.nodes.iter().filter_map(|n| n.split.as_ref()) {
            out[s.feature] += s.gain;
        }
        out
    }
}

/// Gini impurity `1 − Σ (n_c/n)²` of a class-count vector.
pub fn gini_impurity(counts: &[f64]) -> Result<f64> {
    if counts.iter().any(|c| *c < 0.0 || !c.is_finite()) {
        return Err(Error::InvalidInput("class counts must be non-negative".into()));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("class counts are all zero".into()));
    }
    Ok(1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>())
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: usize,
}

/// Split statistic accumulated over the samples of one node.
pub(crate) trait Target {
    type Acc: Clone;
    fn zero(&self) -> Self::Acc;
    fn add(&self, acc: &mut Self::Acc, i: usize, w: f64);
    fn weight(acc: &Self::Acc) -> f64;
    fn impurity(&self, acc: &Self::Acc) -> f64;
    fn is_pure(&self, acc: &Self::Acc) -> bool;
    fn leaf_value(&self, acc: &Self::Acc) -> Vec<f64>;

    /// Best split of a node whose samples are `seg` sorted by `col`: the
    /// largest score (larger is better) over positions where the value
    /// strictly increases, first position on ties. Returns `(score, left_len)`.
    fn scan(&self, seg: &[u32], col: &[f64], weights: &[f64], total: &Self::Acc) -> Option<(f64, usize)>;
}

pub(crate) struct Gini<'a> {
    pub labels: &'a [u32],
    pub num_classes: usize,
}

#[derive(Clone)]
pub(crate) struct ClassAcc {
    counts: Vec<f64>,
    total: f64,
    sum_sq: f64,
}

impl Target for Gini<'_> {
    type Acc = ClassAcc;

    fn zero(&self) -> ClassAcc {
        ClassAcc {
            counts: vec![0.0; self.num_classes],
            total: 0.0,
            sum_sq: 0.0,
        }
    }

    #[inline]
    fn add(&self, acc: &mut ClassAcc, i: usize, w: f64) {
        let c = &mut acc.counts[self.labels[i] as usize];
        acc.sum_sq += (2.0 * *c + w) * w;
        *c += w;
        acc.total += w;
    }

    fn weight(acc: &ClassAcc) -> f64 {
        acc.total
    }

    fn impurity(&self, acc: &ClassAcc) -> f64 {
        gini_impurity(&acc.counts).unwrap_or(0.0)
    }

    fn is_pure(&self, acc: &ClassAcc) -> bool {
        acc.counts.iter().filter(|c| **c > 0.0).count() <= 1
    }

    fn leaf_value(&self, acc: &ClassAcc) -> Vec<f64> {
        acc.counts.iter().map(|c| c / acc.total).collect()
    }

    /// Maximizes `Σl²/|l| + Σr²/|r|`, equivalent to minimizing weighted Gini.
    /// The right side's `Σr²` is `Σt² − 2Σt·l + Σl²`.
    fn scan(&self, seg: &[u32], col: &[f64], weights: &[f64], total: &ClassAcc) -> Option<(f64, usize)> {
        let mut left = vec![0.0; self.num_classes];
        let (mut lw, mut lsq, mut cross) = (0.0, 0.0, 0.0);
        let mut best: Option<(f64, usize)> = None;
        let mut best_score = f64::NEG_INFINITY;
        let mut a = col[seg[0] as usize];
        for pos in 0..seg.len() - 1 {
            let i = seg[pos] as usize;
            let w = weights[i];
            let c = self.labels[i] as usize;
            lsq += (2.0 * left[c] + w) * w;
            left[c] += w;
            cross += total.counts[c] * w;
            lw += w;
            let b = col[seg[pos + 1] as usize];
            if a < b {
                let rsq = total.sum_sq - 2.0 * cross + lsq;
                let score = lsq / lw + rsq / (total.total - lw);
                if score > best_score {
                    best_score = score;
                    best = Some((score, pos + 1));
                }
            }
            a = b;
        }
        best
    }
}

/// Least-squares fit of gradients with a Newton leaf value `scale·Σg/Σh`.
pub(crate) struct Newton<'a> {
    pub gradients: &'a [f64],
    pub hessians: &'a [f64],
    pub scale: f64,
}

#[derive(Clone)]
pub(crate) struct NewtonAcc {
    g: f64,
    h: f64,
    w: f64,
}

impl Target for Newton<'_> {
    type Acc = NewtonAcc;

    fn zero(&self) -> NewtonAcc {
        NewtonAcc { g: 0.0, h: 0.0, w: 0.0 }
    }

    #[inline]
    fn add(&self, acc: &mut NewtonAcc, i: usize, w: f64) {
        acc.g += w * self.gradients[i];
        acc.h += w * self.hessians[i];
        acc.w += w;
    }

    fn weight(acc: &NewtonAcc) -> f64 {
        acc.w
    }

    fn impurity(&self, _acc: &NewtonAcc) -> f64 {
        0.0
    }

    fn is_pure(&self, _acc: &NewtonAcc) -> bool {
        false
    }

    fn leaf_value(&self, acc: &NewtonAcc) -> Vec<f64> {
        vec![self.scale * acc.g / acc.h.max(1e-12)]
    }

    /// Maximizes the squared-error reduction `g_l²/w_l + g_r²/w_r`.
    fn scan(&self, seg: &[u32], col: &[f64], weights: &[f64], total: &NewtonAcc) -> Option<(f64, usize)> {
        let (mut lg, mut lw) = (0.0, 0.0);
        let mut best: Option<(f64, usize)> = None;
        let mut best_score = f64::NEG_INFINITY;
        let mut a = col[seg[0] as usize];
        for pos in 0..seg.len() - 1 {
            let i = seg[pos] as usize;
            let w = weights[i];
            lg += w * self.gradients[i];
            lw += w;
            let b = col[seg[pos + 1] as usize];
            if a < b {
                let rg = total.g - lg;
                let score = lg * lg / lw + rg * rg / (total.w - lw);
                if score > best_score {
                    best_score = score;
                    best = Some((score, pos + 1));
                }
            }
            a = b;
        }
        best
    }
}

/// Per-attribute sample order, ascending by (value, index).
pub(crate) fn presort(columns: &[Vec<f64>]) -> Vec<Vec<u32>> {
    columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..col.len() as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            idx
        })
        .collect()
}

struct Grower<'a, T: Target> {
    columns: &'a [Vec<f64>],
    weights: &'a [f64],
    target: &'a T,
    params: GrowParams,
    root_weight: f64,
    sorted: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    nodes: Vec<Node>,
    rng: Option<&'a mut StreamRng>,
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
    left_len: usize,
}

impl<T: Target> Grower<'_, T> {
    fn accumulate(&self, idx: &[u32]) -> T::Acc {
        let mut acc = self.target.zero();
        for &i in idx {
            self.target.add(&mut acc, i as usize, self.weights[i as usize]);
        }
        acc
    }

    fn grow(&mut self, lo: usize, hi: usize, depth: usize, total: T::Acc) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            split: None,
            value: self.target.leaf_value(&total),
            weight: T::weight(&total),
        });
        if depth >= self.params.max_depth
            || T::weight(&total) < self.params.min_samples_split as f64
            || hi - lo < 2
            || self.target.is_pure(&total)
        {
            return id;
        }
        let Some(best) = self.find_split(lo, hi, &total) else {
            return id;
        };

        let mid = lo + best.left_len;
        for &i in &self.sorted[best.feature][lo..mid] {
            self.goes_left[i as usize] = true;
        }
        for j in 0..self.sorted.len() {
            if j == best.feature {
                continue;
            }
            let seg = &mut self.sorted[j][lo..hi];
            self.scratch.clear();
            let mut write = 0;
            for r in 0..seg.len() {
                let i = seg[r];
                if self.goes_left[i as usize] {
                    seg[write] = i;
                    write += 1;
                } else {
                    self.scratch.push(i);
                }
            }
            seg[write..].copy_from_slice(&self.scratch);
        }
        for &i in &self.sorted[best.feature][lo..mid] {
            self.goes_left[i as usize] = false;
        }

        let left_acc = self.accumulate(&self.sorted[best.feature][lo..mid]);
        let right_acc = self.accumulate(&self.sorted[best.feature][mid..hi]);
        let w = T::weight(&total);
        let gain = w / self.root_weight
            * (self.target.impurity(&total)
                - T::weight(&left_acc) / w * self.target.impurity(&left_acc)
                - T::weight(&right_acc) / w * self.target.impurity(&right_acc));

        let left = self.grow(lo, mid, depth + 1, left_acc);
        let right = self.grow(mid, hi, depth + 1, right_acc);
        self.nodes[id].split = Some(Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            gain,
        });
        id
    }

    fn find_split(&mut self, lo: usize, hi: usize, total: &T::Acc) -> Option<Best> {
        let d = self.columns.len();
        let mut order: Vec<usize> = (0..d).collect();
        if self.params.max_features < d {
            if let Some(rng) = self.rng.as_deref_mut() {
                order.shuffle(rng);
            }
        }
        let mut best: Option<Best> = None;
        let mut evaluated = 0;
        for &j in &order {
            if evaluated >= self.params.max_features {
                break;
            }
            let col = &self.columns[j];
            let seg = &self.sorted[j][lo..hi];
            if col[seg[0] as usize] == col[seg[seg.len() - 1] as usize] {
                continue;
            }
            evaluated += 1;
            let Some((score, left_len)) = self.target.scan(seg, col, self.weights, total) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(cur) => score > cur.score || (score == cur.score && j < cur.feature),
            };
            if better {
                let a = col[seg[left_len - 1] as usize];
                let b = col[seg[left_len] as usize];
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b || threshold < a {
                    threshold = a;
                }
                best = Some(Best {
                    score,
                    feature: j,
                    threshold,
                    left_len,
                });
            }
        }
        best
    }
}

/// Grows one tree on the samples with positive weight.
///
/// `columns` holds attribute values column-major; `sorted` is the output of
/// [`presort`] over the same rows. A random generator is needed only when
/// `max_features` is below the attribute count.
pub(crate) fn grow_tree<T: Target>(
    columns: &[Vec<f64>],
    sorted: &[Vec<u32>],
    weights: &[f64],
    target: &T,
    params: GrowParams,
    rng: Option<&mut StreamRng>,
) -> Tree {
    let sorted: Vec<Vec<u32>> = sorted
        .iter()
        .map(|s| s.iter().copied().filter(|&i| weights[i as usize] > 0.0).collect())
        .collect();
    let n = columns.first().map_or(0, Vec::len);
    let len = sorted.first().map_or(0, Vec::len);
    let mut grower = Grower {
        columns,
        weights,
        target,
        params,
        root_weight: 0.0,
        sorted,
        goes_left: vec![false; n],
        scratch: Vec::with_capacity(len),
        nodes: Vec::new(),
        rng,
    };
    let root_idx: Vec<u32> = grower.sorted.first().cloned().unwrap_or_default();
    let total = grower.accumulate(&root_idx);
    grower.root_weight = T::weight(&total).max(f64::MIN_POSITIVE);
    if len == 0 {
        return Tree {
            nodes: vec![Node {
                split: None,
                value: Vec::new(),
                weight: 0.0,
            }],
            num_features: columns.len(),
        };
    }
    grower.grow(0, len, 0, total);
    Tree {
        nodes: grower.nodes,
        num_features: columns.len(),
    }
}
