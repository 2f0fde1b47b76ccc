//! Classification metrics, in percent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check(predictions: &[usize], labels: &[usize]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("no predictions to score".into()));
    }
    if predictions.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    Ok(())
}

pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    check(predictions, labels)?;
    let correct = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(100.0 * correct as f64 / labels.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroF1 {
    pub value: f64,
    pub per_class: Vec<f64>,
    /// Classes with neither predicted nor actual members; each counts as F = 0.
    pub zero_support: Vec<usize>,
}

pub fn macro_f1_detailed(predictions: &[usize], labels: &[usize], num_classes: usize) -> Result<MacroF1> {
    check(predictions, labels)?;
    if num_classes == 0 {
        return Err(Error::InvalidInput("num_classes must be positive".into()));
    }
    let mut tp = vec![0usize; num_classes];
    let mut predicted = vec![0usize; num_classes];
    let mut actual = vec![0usize; num_classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        if p >= num_classes || y >= num_classes {
            return Err(Error::InvalidInput(format!("class index out of range 0..{num_classes}")));
        }
        predicted[p] += 1;
        actual[y] += 1;
        if p == y {
            tp[p] += 1;
        }
    }
    let mut zero_support = Vec::new();
    let per_class: Vec<f64> = (0..num_classes)
        .map(|c| {
            if predicted[c] == 0 && actual[c] == 0 {
                zero_support.push(c);
                return 0.0;
            }
            if tp[c] == 0 {
                return 0.0;
            }
            let precision = tp[c] as f64 / predicted[c] as f64;
            let recall = tp[c] as f64 / actual[c] as f64;
            2.0 * precision * recall / (precision + recall)
        })
        .collect();
    let value = 100.0 * per_class.iter().sum::<f64>() / num_classes as f64;
    Ok(MacroF1 {
        value,
        per_class,
        zero_support,
    })
}

pub fn macro_f1(predictions: &[usize], labels: &[usize], num_classes: usize) -> Result<f64> {
    Ok(macro_f1_detailed(predictions, labels, num_classes)?.value)
}
