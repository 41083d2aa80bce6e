//! Confusion matrix and overall error rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Core classification metrics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `confusion[t][p]` counts test pixels of true class t+1 predicted as
    /// p+1.
    pub confusion: Vec<Vec<u64>>,
    /// Misclassified test pixels over all test pixels.
    pub overall_error_rate: f64,
    /// Per-class recall; `null` when a class has no test pixels.
    pub per_class_accuracy: Vec<Option<f64>>,
}

/// Tally predictions against truth. Labels must be 1-based and within
/// `n_classes`.
pub fn compute_metrics(truth: &[u16], predicted: &[u16], n_classes: u16) -> Result<Metrics> {
    if truth.len() != predicted.len() {
        return Err(Error::Contract(format!(
            "{} truth labels vs {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Contract("no test pixels to score".into()));
    }
    let c = n_classes as usize;
    let mut confusion = vec![vec![0u64; c]; c];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t == 0 || t as usize > c {
            return Err(Error::Contract(format!(
                "truth label {t} outside 1..={c}"
            )));
        }
        if p == 0 || p as usize > c {
            return Err(Error::Contract(format!(
                "predicted label {p} outside 1..={c}"
            )));
        }
        confusion[t as usize - 1][p as usize - 1] += 1;
    }
    let total: u64 = truth.len() as u64;
    let correct: u64 = (0..c).map(|i| confusion[i][i]).sum();
    let per_class_accuracy = (0..c)
        .map(|i| {
            let row: u64 = confusion[i].iter().sum();
            if row == 0 {
                None
            } else {
                Some(confusion[i][i] as f64 / row as f64)
            }
        })
        .collect();
    Ok(Metrics {
        confusion,
        overall_error_rate: 1.0 - correct as f64 / total as f64,
        per_class_accuracy,
    })
}
