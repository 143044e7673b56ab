//! Threshold-independent (AUC) and threshold-dependent (precision, recall,
//! MCC) accuracy.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parallel scores and actual labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::MalformedScores(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::MalformedScores(format!("non-finite score {bad}")));
        }
        Ok(ScoredSet { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn has_both_classes(&self) -> bool {
        let p = self.positives();
        p > 0 && p < self.len()
    }
}

/// Mann–Whitney AUC: the fraction of (positive, negative) pairs in which the
/// positive scores higher, ties counting one half. Computed from average
/// ranks in `O(n log n)`.
pub fn auc(set: &ScoredSet) -> Result<f64> {
    let n_pos = set.positives();
    let n_neg = set.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| {
        set.scores[a]
            .partial_cmp(&set.scores[b])
            .unwrap_or(Ordering::Equal)
    });
    // Sum of doubled ranks of positives keeps every intermediate integral.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && set.scores[order[j]] == set.scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j share the average (i + 1 + j) / 2.
        let doubled = (i + 1 + j) as u128;
        let pos_in_group = order[i..j].iter().filter(|&&k| set.labels[k]).count() as u128;
        rank_sum2 += doubled * pos_in_group;
        i = j;
    }
    let np = n_pos as u128;
    // 2U = 2R - np(np + 1)
    let u2 = rank_sum2 - np * (np + 1);
    Ok(u2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Predicted defective iff `score > threshold`.
pub fn confusion(set: &ScoredSet, threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&s, &actual) in set.scores.iter().zip(&set.labels) {
        match (s > threshold, actual) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub precision: f64,
    pub recall: f64,
    pub mcc: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall and Matthews correlation; any zero denominator yields 0.
pub fn precision_recall_mcc(c: &ConfusionCounts) -> ThresholdMetrics {
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    ThresholdMetrics {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        mcc: ratio(tp * tn - fp * fn_, den),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(scores: &[f64], labels: &[bool]) -> ScoredSet {
        ScoredSet::new(scores.to_vec(), labels.to_vec()).unwrap()
    }

    #[test]
    fn auc_examples() {
        let (t, f) = (true, false);
        assert_eq!(auc(&set(&[0.9, 0.8, 0.3, 0.1], &[t, t, f, f])).unwrap(), 1.0);
        assert_eq!(auc(&set(&[0.1, 0.2, 0.8, 0.9], &[t, t, f, f])).unwrap(), 0.0);
        // Pairs: (0.8 vs 0.6,0.4,0.2) = 3 wins; (0.6 vs 0.6 tie, 0.4, 0.2) = 2.5.
        let v = auc(&set(&[0.8, 0.6, 0.6, 0.4, 0.2], &[t, f, t, f, f])).unwrap();
        assert!((v - 5.5 / 6.0).abs() < 1e-15);
        assert_eq!(auc(&set(&[0.3; 4], &[t, f, t, f])).unwrap(), 0.5);
    }

    #[test]
    fn auc_single_class_errors() {
        assert!(matches!(auc(&set(&[0.1, 0.2], &[true, true])), Err(Error::SingleClass)));
        assert!(matches!(auc(&set(&[0.1], &[false])), Err(Error::SingleClass)));
    }

    #[test]
    fn malformed_sets() {
        assert!(ScoredSet::new(vec![0.1], vec![]).is_err());
        assert!(ScoredSet::new(vec![f64::NAN], vec![true]).is_err());
    }

    #[test]
    fn confusion_examples() {
        let c = confusion(&set(&[0.7, 0.7], &[true, false]), 0.5);
        assert_eq!((c.tp, c.fp), (1, 1));
        let c = confusion(&set(&[1.0, 0.2, 0.9], &[true, false, true]), 1.0);
        assert_eq!(c.tp + c.fp, 0);
        let c = confusion(&set(&[0.6, 0.4], &[true, false]), 0.5);
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 0, tn: 1, fn_: 0 });
        assert_eq!(c.total(), 2);
    }

    #[test]
    fn threshold_metric_examples() {
        let m = precision_recall_mcc(&ConfusionCounts { tp: 5, fp: 0, tn: 5, fn_: 0 });
        assert_eq!((m.precision, m.recall, m.mcc), (1.0, 1.0, 1.0));
        let m = precision_recall_mcc(&ConfusionCounts { tp: 0, fp: 0, tn: 4, fn_: 3 });
        assert_eq!((m.precision, m.recall, m.mcc), (0.0, 0.0, 0.0));
        let m = precision_recall_mcc(&ConfusionCounts { tp: 3, fp: 1, tn: 4, fn_: 2 });
        assert!((m.precision - 0.75).abs() < 1e-15);
        assert!((m.recall - 0.6).abs() < 1e-15);
        assert!((m.mcc - 10.0 / 600f64.sqrt()).abs() < 1e-15);
    }
}
