//! The per-feature screening statistic: an average of log Bayes factors
//! built from leave-one-out kernel density estimates.
//!
//! For a feature with class-0 values of count `n0`, class-1 values of count
//! `n1`, pooled count `N = n0 + n1`, and bandwidth `b`, every sample point
//! `i` contributes the log ratio of its leave-one-out within-class density to
//! its leave-one-out pooled density, and the statistic is the sum of those
//! logs divided by `N`:
//!
//! ```text
//! N * ALB = sum_{i in class 1} log(g_i / h_i) + sum_{i in class 0} log(f_i / h_i)
//! ```
//!
//! Each leave-one-out estimate is normalized by (number of terms summed) * b.
//! With that convention every log ratio is at most log((N-1)/(count-1)), which
//! keeps the statistic below the finite bound `log(2) * max(n0/(n0-1), n1/(n1-1))`.
//!
//! Positive values indicate a class-distribution difference; under the null
//! the statistic is negative with probability tending to one.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{plugin_bandwidth, Bandwidth};
use crate::dataio::Dataset;
use crate::error::{invalid, Result};
use crate::kernel::Kernel;

/// Counts how often a density was clamped up to the smallest positive normal
/// float before its log. With the Hall kernel this is not expected to trigger
/// on realistic data; a nonzero count flags pathological inputs.
static DENSITY_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Total density clamps since process start (diagnostic only).
pub fn density_clamp_count() -> u64 {
    DENSITY_CLAMPS.load(Ordering::Relaxed)
}

/// One feature column with aligned 0/1 labels; both classes must have at
/// least two members for the leave-one-out estimates to exist.
#[derive(Debug, Clone, Copy)]
pub struct LabeledFeature<'a> {
    values: &'a [f64],
    labels: &'a [u8],
    n0: usize,
    n1: usize,
}

impl<'a> LabeledFeature<'a> {
    pub fn new(values: &'a [f64], labels: &'a [u8]) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(invalid(format!(
                "feature has {} values but {} labels",
                values.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(invalid(format!("label {bad} is not 0 or 1")));
        }
        let n1 = labels.iter().filter(|&&l| l == 1).count();
        let n0 = labels.len() - n1;
        if n0 < 2 || n1 < 2 {
            return Err(invalid(format!(
                "each class needs at least 2 samples, have {n0} and {n1}"
            )));
        }
        Ok(LabeledFeature { values, labels, n0, n1 })
    }

    pub fn values(&self) -> &[f64] {
        self.values
    }

    /// (label-0 count, label-1 count).
    pub fn class_counts(&self) -> (usize, usize) {
        (self.n0, self.n1)
    }
}

/// Statistic value for one feature plus the bandwidth it was computed with.
/// Degenerate features carry `alb = 0` and are excluded from selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlbResult {
    pub feature_index: usize,
    pub alb: f64,
    pub bandwidth: Bandwidth,
    pub degenerate: bool,
}

#[inline]
fn clamped_ln(density: f64) -> f64 {
    if density < f64::MIN_POSITIVE {
        DENSITY_CLAMPS.fetch_add(1, Ordering::Relaxed);
        f64::MIN_POSITIVE.ln()
    } else {
        density.ln()
    }
}

/// Compute the statistic for one feature with a fixed bandwidth.
///
/// A degenerate bandwidth yields a degenerate result rather than an error.
/// The output is a pure function of the inputs: within-feature summation
/// order is fixed, so results are identical under any outer parallelism.
pub fn alb_statistic(feature: &LabeledFeature<'_>, bandwidth: &Bandwidth) -> AlbResult {
    if bandwidth.is_degenerate() {
        return AlbResult {
            feature_index: 0,
            alb: 0.0,
            bandwidth: *bandwidth,
            degenerate: true,
        };
    }
    let values = feature.values;
    let labels = feature.labels;
    let total = values.len();
    let b = bandwidth.value;
    let kernel = Kernel::Hall;

    // Per-point kernel sums split by the class of the other point. The kernel
    // is symmetric, so each unordered pair is evaluated once; accumulation
    // order over pairs is fixed (row-major), keeping results bitwise stable.
    let mut sum0 = vec![0.0f64; total];
    let mut sum1 = vec![0.0f64; total];
    for i in 0..total {
        for r in (i + 1)..total {
            let k = kernel.eval_unchecked((values[i] - values[r]) / b);
            if labels[r] == 0 {
                sum0[i] += k;
            } else {
                sum1[i] += k;
            }
            if labels[i] == 0 {
                sum0[r] += k;
            } else {
                sum1[r] += k;
            }
        }
    }

    let (n0, n1) = (feature.n0 as f64, feature.n1 as f64);
    let pooled_norm = (total as f64 - 1.0) * b;
    let mut log_sum = 0.0f64;
    for i in 0..total {
        let (own_sum, own_norm) = if labels[i] == 0 {
            (sum0[i], (n0 - 1.0) * b)
        } else {
            (sum1[i], (n1 - 1.0) * b)
        };
        let within = own_sum / own_norm;
        let pooled = (sum0[i] + sum1[i]) / pooled_norm;
        log_sum += clamped_ln(within) - clamped_ln(pooled);
    }

    AlbResult {
        feature_index: 0,
        alb: log_sum / total as f64,
        bandwidth: *bandwidth,
        degenerate: false,
    }
}

/// Finite upper bound of the statistic: `log(2) * max(n0/(n0-1), n1/(n1-1))`.
pub fn alb_upper_bound(n0: usize, n1: usize) -> Result<f64> {
    if n0 < 2 || n1 < 2 {
        return Err(invalid(format!(
            "alb_upper_bound: class counts {n0}, {n1} must be at least 2"
        )));
    }
    let r0 = n0 as f64 / (n0 as f64 - 1.0);
    let r1 = n1 as f64 / (n1 as f64 - 1.0);
    Ok(std::f64::consts::LN_2 * r0.max(r1))
}

/// Per-feature plug-in bandwidth followed by the statistic, for every column.
///
/// Features evaluate in parallel; output order matches feature order and is
/// identical for any worker count.
pub fn alb_all(dataset: &Dataset) -> Result<Vec<AlbResult>> {
    dataset.require_two_classes(2)?;
    let labels = dataset.labels();
    let rows = dataset.n_rows();
    let results = dataset
        .columns()
        .par_iter()
        .enumerate()
        .map(|(j, col)| {
            let bw = plugin_bandwidth(col, rows).expect("row count validated");
            let feature = LabeledFeature::new(col, labels).expect("classes validated");
            AlbResult {
                feature_index: j,
                ..alb_statistic(&feature, &bw)
            }
        })
        .collect();
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandwidth::ScaleSource;
    use crate::dataio::Dataset;
    use crate::rng::{standard_normal, substream_rng};

    fn unit_bandwidth() -> Bandwidth {
        Bandwidth {
            value: 1.0,
            source: ScaleSource::RobustIqr,
        }
    }

    // Frozen from the arbitrary-precision oracle (tests/oracle.rs) for
    // class0 = {-1, 0, 1}, class1 = {-1, 0, 1}, b = 1.
    const V1: f64 = -0.08116480931183661;

    #[test]
    fn symmetric_three_point_feature_matches_frozen_oracle_value() {
        let values = [-1.0, 0.0, 1.0, -1.0, 0.0, 1.0];
        let labels = [0, 0, 0, 1, 1, 1];
        let feature = LabeledFeature::new(&values, &labels).unwrap();
        let r = alb_statistic(&feature, &unit_bandwidth());
        assert!(!r.degenerate);
        assert!(r.alb < 0.0);
        assert!((r.alb - V1).abs() < 1e-12, "alb = {}", r.alb);
    }

    #[test]
    fn label_swap_leaves_statistic_unchanged_for_balanced_classes() {
        let mut rng = substream_rng(5, &[1]);
        let values: Vec<f64> = (0..16).map(|_| standard_normal(&mut rng)).collect();
        let labels: Vec<u8> = (0..16).map(|i| u8::from(i % 2 == 0)).collect();
        let swapped: Vec<u8> = labels.iter().map(|&l| 1 - l).collect();
        let f1 = LabeledFeature::new(&values, &labels).unwrap();
        let f2 = LabeledFeature::new(&values, &swapped).unwrap();
        let b = unit_bandwidth();
        assert_eq!(alb_statistic(&f1, &b).alb, alb_statistic(&f2, &b).alb);
    }

    #[test]
    fn degenerate_bandwidth_flags_result() {
        let values = [2.0; 6];
        let labels = [0, 0, 0, 1, 1, 1];
        let feature = LabeledFeature::new(&values, &labels).unwrap();
        let bw = Bandwidth {
            value: 0.0,
            source: ScaleSource::Degenerate,
        };
        let r = alb_statistic(&feature, &bw);
        assert!(r.degenerate);
        assert_eq!(r.alb, 0.0);
    }

    #[test]
    fn class_count_preconditions() {
        let values = [1.0, 2.0, 3.0];
        assert!(LabeledFeature::new(&values, &[0, 0, 1]).is_err());
        assert!(LabeledFeature::new(&values, &[0, 0, 2]).is_err());
        assert!(LabeledFeature::new(&values, &[0, 0]).is_err());
    }

    #[test]
    fn upper_bound_closed_forms() {
        assert!((alb_upper_bound(20, 20).unwrap() - 0.7296286111157319).abs() < 1e-9);
        assert!((alb_upper_bound(100, 2).unwrap() - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!(alb_upper_bound(1, 5).is_err());
        // With balanced classes the bound decreases toward log 2.
        let mut prev = f64::INFINITY;
        for n in [2usize, 3, 5, 10, 100, 1000] {
            let b = alb_upper_bound(n, n).unwrap();
            assert!(b < prev);
            assert!(b > std::f64::consts::LN_2);
            prev = b;
        }
    }

    #[test]
    fn alb_all_matches_per_feature_path_and_duplicates_agree() {
        let mut rng = substream_rng(21, &[7]);
        let rows = 14;
        let labels: Vec<u8> = (0..rows).map(|i| u8::from(i >= 7)).collect();
        let mut columns: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..rows).map(|_| standard_normal(&mut rng)).collect())
            .collect();
        columns.push(columns[0].clone()); // duplicate of feature 0
        let dataset = Dataset::from_columns(columns, labels.clone()).unwrap();

        let all = alb_all(&dataset).unwrap();
        assert_eq!(all.len(), 6);
        for (j, r) in all.iter().enumerate() {
            assert_eq!(r.feature_index, j);
            let bw = plugin_bandwidth(dataset.column(j), rows).unwrap();
            let feature = LabeledFeature::new(dataset.column(j), &labels).unwrap();
            let single = alb_statistic(&feature, &bw);
            assert_eq!(r.alb, single.alb);
        }
        assert_eq!(all[5].alb, all[0].alb);
    }

    #[test]
    fn all_constant_features_are_degenerate() {
        let dataset = Dataset::from_columns(
            vec![vec![1.0; 8], vec![-2.0; 8]],
            vec![0, 0, 0, 0, 1, 1, 1, 1],
        )
        .unwrap();
        let all = alb_all(&dataset).unwrap();
        assert!(all.iter().all(|r| r.degenerate && r.alb == 0.0));
    }

    #[test]
    fn statistic_respects_upper_bound_on_separated_data() {
        // Two far-apart tight clusters push the statistic near its bound.
        let values = [
            -100.0, -100.1, -99.9, -100.05, 100.0, 100.1, 99.9, 100.05,
        ];
        let labels = [0, 0, 0, 0, 1, 1, 1, 1];
        let feature = LabeledFeature::new(&values, &labels).unwrap();
        let bw = Bandwidth {
            value: 0.05,
            source: ScaleSource::RobustIqr,
        };
        let r = alb_statistic(&feature, &bw);
        let bound = alb_upper_bound(4, 4).unwrap();
        assert!(r.alb > 0.5, "expected strong separation, got {}", r.alb);
        assert!(r.alb <= bound);
    }
}
