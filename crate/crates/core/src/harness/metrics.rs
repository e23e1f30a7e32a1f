//! Confusion-matrix and cell-set metrics.

use serde::Serialize;

use crate::query::CellSet;

use super::HarnessError;

/// Binary classification counts with the derived rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryMetrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    ratio(2.0 * p * r, p + r)
}

/// Accuracy, precision and recall from raw counts. Precision and recall
/// are 0 when their denominator is 0.
pub fn metrics_from_confusion(
    tp: u64,
    fp: u64,
    fn_: u64,
    tn: u64,
) -> Result<BinaryMetrics, HarnessError> {
    let total = tp + fp + fn_ + tn;
    if total == 0 {
        return Err(HarnessError::AllZero);
    }
    let precision = ratio(tp as f64, (tp + fp) as f64);
    let recall = ratio(tp as f64, (tp + fn_) as f64);
    Ok(BinaryMetrics {
        tp,
        fp,
        fn_,
        tn,
        accuracy: (tp + tn) as f64 / total as f64,
        precision,
        recall,
        f1: harmonic(precision, recall),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set-intersection precision, recall and F1. Every ratio with a zero
/// denominator is 0, so an empty prediction scores (0, 0, 0).
pub fn cell_prf(predicted: &CellSet, gold: &CellSet) -> Prf {
    let hit = predicted.intersection_len(gold) as f64;
    let precision = ratio(hit, predicted.len() as f64);
    let recall = ratio(hit, gold.len() as f64);
    Prf {
        precision,
        recall,
        f1: harmonic(precision, recall),
    }
}

/// Component-wise mean; all zeros for no input.
pub fn macro_average(scores: &[Prf]) -> Prf {
    if scores.is_empty() {
        return Prf::default();
    }
    let n = scores.len() as f64;
    Prf {
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
    }
}

/// Square confusion matrix; `counts[gold][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> ConfusionMatrix {
        let k = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; k]; k],
        }
    }

    /// Panics when either index is not below the label count.
    pub fn record(&mut self, gold: usize, predicted: usize) {
        self.counts[gold][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct() as f64, self.total() as f64)
    }

    /// Counts for a two-label matrix whose label 1 is the positive class.
    pub fn binary(&self) -> Option<BinaryMetrics> {
        if self.labels.len() != 2 {
            return None;
        }
        let c = &self.counts;
        metrics_from_confusion(c[1][1], c[0][1], c[1][0], c[0][0]).ok()
    }
}
