//! Classification metrics: per-class one-vs-rest scores, support-weighted
//! averages, and confusion matrices.
//!
//! Rows of the confusion matrix are ground truth, columns are
//! predictions; the row-normalized view divides each row by its support.
//! The overall `accuracy` is the fraction of correct predictions, which
//! equals the support-weighted average of the per-class recalls (the
//! diagonal of the row-normalized confusion matrix). Per-class accuracy
//! keeps the one-vs-rest form `(TP+TN)/N`.

use crate::error::{Error, Result};
use serde::Serialize;

/// One-vs-rest counts and scores for a single class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub support: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    /// (TP + TN) / N.
    pub accuracy: f64,
    /// TP / (TP + FP); zero when nothing was predicted positive.
    pub precision: f64,
    /// TP / (TP + FN); zero when the class has no true instances.
    pub recall: f64,
    /// Harmonic mean of precision and recall; zero when both are zero.
    pub f1: f64,
}

/// Aggregated scores over all classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    /// Fraction of correct predictions (= support-weighted mean recall).
    pub accuracy: f64,
    /// Support-weighted mean of per-class precision.
    pub precision: f64,
    /// Support-weighted mean of per-class recall.
    pub recall: f64,
    /// Support-weighted mean of per-class F1.
    pub f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub n: usize,
}

impl Metrics {
    pub fn get(&self, name: MetricKind) -> f64 {
        match name {
            MetricKind::Accuracy => self.accuracy,
            MetricKind::Precision => self.precision,
            MetricKind::Recall => self.recall,
            MetricKind::F1 => self.f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Accuracy,
        MetricKind::Precision,
        MetricKind::Recall,
        MetricKind::F1,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::Precision => "precision",
            MetricKind::Recall => "recall",
            MetricKind::F1 => "f1",
        }
    }
}

/// Counts of (truth, prediction) pairs; rows are ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
    num_classes: usize,
}

impl ConfusionMatrix {
    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn n(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Each row divided by its sum; rows with zero support stay all-zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                if total == 0 {
                    vec![0.0; self.num_classes]
                } else {
                    row.iter().map(|&c| c as f64 / total as f64).collect()
                }
            })
            .collect()
    }

    /// Builds a matrix directly from counts (rows = truth).
    pub fn from_counts(counts: Vec<Vec<usize>>) -> Result<Self> {
        let num_classes = counts.len();
        if num_classes == 0 || counts.iter().any(|r| r.len() != num_classes) {
            return Err(Error::DimensionMismatch("confusion matrix must be square".into()));
        }
        Ok(Self { counts, num_classes })
    }
}

/// Computes per-class and weighted metrics plus the confusion matrix for
/// predicted class indices against ground truth.
pub fn compute_metrics(
    truth: &[usize],
    predicted: &[usize],
    num_classes: usize,
) -> Result<(Metrics, ConfusionMatrix)> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} truth labels vs {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset("metrics need at least one sample".into()));
    }
    let mut counts = vec![vec![0usize; num_classes]; num_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= num_classes || p >= num_classes {
            return Err(Error::DimensionMismatch(format!(
                "class index out of range: truth {t}, predicted {p}, classes {num_classes}"
            )));
        }
        counts[t][p] += 1;
    }
    let confusion = ConfusionMatrix::from_counts(counts)?;
    let metrics = metrics_from_confusion(&confusion);
    Ok((metrics, confusion))
}

/// Derives all scores from a confusion matrix with rows = truth.
pub fn metrics_from_confusion(confusion: &ConfusionMatrix) -> Metrics {
    let c = confusion.num_classes();
    let counts = confusion.counts();
    let n: usize = confusion.n();
    let nf = n as f64;

    let mut per_class = Vec::with_capacity(c);
    let mut correct = 0usize;
    for k in 0..c {
        let tp: usize = counts[k][k];
        let fn_: usize = counts[k].iter().sum::<usize>() - tp;
        let fp: usize = (0..c).map(|t| counts[t][k]).sum::<usize>() - tp;
        let tn = n - tp - fn_ - fp;
        correct += tp;
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            support: tp + fn_,
            tp,
            fp,
            fn_,
            tn,
            accuracy: (tp + tn) as f64 / nf,
            precision,
            recall,
            f1,
        });
    }

    let weighted = |f: fn(&ClassMetrics) -> f64| -> f64 {
        per_class
            .iter()
            .map(|m| m.support as f64 * f(m))
            .sum::<f64>()
            / nf
    };

    Metrics {
        accuracy: correct as f64 / nf,
        precision: weighted(|m| m.precision),
        recall: weighted(|m| m.recall),
        f1: weighted(|m| m.f1),
        per_class,
        n,
    }
}
