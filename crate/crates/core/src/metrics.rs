//! Classification and screening quality metrics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Standard confusion counts for a declared positive label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.false_negative + self.true_negative
    }
}

/// Fraction of positions where prediction equals truth (the "Rand index" in
/// the two-class sense: the percentage of correct decisions).
pub fn rand_index(pred: &[u8], truth: &[u8]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(invalid(format!(
            "length mismatch: {} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(invalid("rand_index: empty inputs"));
    }
    let correct = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// Confusion counts with the declared positive label.
pub fn confusion(pred: &[u8], truth: &[u8], positive_label: u8) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(invalid(format!(
            "length mismatch: {} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(invalid("confusion: empty inputs"));
    }
    let mut counts = ConfusionCounts {
        true_positive: 0,
        false_positive: 0,
        false_negative: 0,
        true_negative: 0,
    };
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == positive_label, t == positive_label) {
            (true, true) => counts.true_positive += 1,
            (true, false) => counts.false_positive += 1,
            (false, true) => counts.false_negative += 1,
            (false, false) => counts.true_negative += 1,
        }
    }
    Ok(counts)
}

/// Recall and precision of a selected feature set against the ground-truth
/// importance mask, with feature-level confusion counts.
///
/// Conventions: recall is 1 when there are no important features, and
/// precision is 1 when the selection is empty (no false claims made).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningQuality {
    pub recall: f64,
    pub precision: f64,
    pub counts: ConfusionCounts,
}

pub fn screening_quality(selected: &[usize], important: &[bool]) -> Result<ScreeningQuality> {
    if let Some(&bad) = selected.iter().find(|&&i| i >= important.len()) {
        return Err(invalid(format!(
            "selected index {bad} out of range for {} features",
            important.len()
        )));
    }
    let mut picked = vec![false; important.len()];
    for &i in selected {
        picked[i] = true;
    }
    let mut counts = ConfusionCounts {
        true_positive: 0,
        false_positive: 0,
        false_negative: 0,
        true_negative: 0,
    };
    for (&sel, &imp) in picked.iter().zip(important) {
        match (sel, imp) {
            (true, true) => counts.true_positive += 1,
            (true, false) => counts.false_positive += 1,
            (false, true) => counts.false_negative += 1,
            (false, false) => counts.true_negative += 1,
        }
    }
    let n_important = counts.true_positive + counts.false_negative;
    let n_selected = counts.true_positive + counts.false_positive;
    Ok(ScreeningQuality {
        recall: if n_important == 0 {
            1.0
        } else {
            counts.true_positive as f64 / n_important as f64
        },
        precision: if n_selected == 0 {
            1.0
        } else {
            counts.true_positive as f64 / n_selected as f64
        },
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rand_index_basics() {
        assert_eq!(rand_index(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(rand_index(&[1, 0, 0], &[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(rand_index(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.75);
        assert!(rand_index(&[0], &[0, 1]).is_err());
        assert!(rand_index(&[], &[]).is_err());
    }

    #[test]
    fn rand_index_symmetric_and_relabel_invariant() {
        let a = [0, 1, 1, 0, 1];
        let b = [1, 1, 0, 0, 1];
        assert_eq!(rand_index(&a, &b).unwrap(), rand_index(&b, &a).unwrap());
        let a_flip: Vec<u8> = a.iter().map(|&x| 1 - x).collect();
        let b_flip: Vec<u8> = b.iter().map(|&x| 1 - x).collect();
        assert_eq!(
            rand_index(&a, &b).unwrap(),
            rand_index(&a_flip, &b_flip).unwrap()
        );
    }

    #[test]
    fn confusion_basics() {
        let all_pos = confusion(&[1; 5], &[1; 5], 1).unwrap();
        assert_eq!(
            all_pos,
            ConfusionCounts {
                true_positive: 5,
                false_positive: 0,
                false_negative: 0,
                true_negative: 0
            }
        );
        let wrong = confusion(&[1; 4], &[0; 4], 1).unwrap();
        assert_eq!(wrong.false_positive, 4);
        assert_eq!(wrong.total(), 4);
    }

    #[test]
    fn rand_index_decomposes_as_confusion_identity() {
        let pred = [0, 1, 0, 1, 1, 0, 1];
        let truth = [1, 1, 0, 0, 1, 0, 0];
        let c = confusion(&pred, &truth, 1).unwrap();
        let ri = rand_index(&pred, &truth).unwrap();
        let from_counts = (c.true_positive + c.true_negative) as f64 / c.total() as f64;
        assert!((ri - from_counts).abs() < 1e-15);
    }

    #[test]
    fn screening_quality_half_overlap() {
        let important = [false, false, true, true];
        let q = screening_quality(&[1, 2], &important).unwrap();
        assert_eq!(q.recall, 0.5);
        assert_eq!(q.precision, 0.5);
        assert_eq!(q.counts.true_positive, 1);
        assert_eq!(q.counts.false_positive, 1);
        assert_eq!(q.counts.false_negative, 1);
        assert_eq!(q.counts.true_negative, 1);
    }

    #[test]
    fn screening_quality_conventions() {
        let important = [true, false, true];
        let exact = screening_quality(&[0, 2], &important).unwrap();
        assert_eq!(exact.recall, 1.0);
        assert_eq!(exact.precision, 1.0);

        let empty = screening_quality(&[], &important).unwrap();
        assert_eq!(empty.recall, 0.0);
        assert_eq!(empty.precision, 1.0);

        let no_important = screening_quality(&[1], &[false, false]).unwrap();
        assert_eq!(no_important.recall, 1.0);
        assert_eq!(no_important.precision, 0.0);

        assert!(screening_quality(&[7], &important).is_err());
    }
}
