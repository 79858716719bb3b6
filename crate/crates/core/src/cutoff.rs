//! Cutoff selection for screening: top-d, zero, permutation-percentile, and
//! cross-validated thresholds, plus the permutation-null machinery.
//!
//! Selection is by strict inequality everywhere: a feature survives iff its
//! statistic is strictly greater than the threshold. Degenerate features
//! never survive.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alb::{alb_all, alb_statistic, AlbResult, LabeledFeature};
use crate::bandwidth::{plugin_bandwidth, quantile_type7};
use crate::bayes;
use crate::dataio::Dataset;
use crate::error::{invalid, Error, Result};
use crate::metrics::rand_index;
use crate::rng::{sample_without_replacement, substream_rng};
use crate::ttest::{TTestResult, TTestScreenMode};

use rand::seq::SliceRandom;

const NULL_SELECT_TAG: u64 = 0x4E53_454C; // "NSEL"
const NULL_PERM_TAG: u64 = 0x4E50_4552; // "NPER"

/// A cutoff strategy for the per-feature statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CutoffRule {
    /// Keep the d largest statistics.
    TopD { d: usize },
    /// Keep statistics above the (1 - alpha) quantile of a permutation null
    /// built from `covariates` randomly chosen features permuted
    /// `permutations` times each.
    Percentile {
        alpha: f64,
        covariates: usize,
        permutations: usize,
        seed: u64,
    },
    /// Keep statistics above the candidate cutoff that maximizes held-out
    /// classification accuracy; ties go to the largest cutoff.
    CrossValidated { candidates: Vec<f64> },
    /// Keep strictly positive statistics.
    Zero,
}

/// The rule recorded on a report: either a statistic cutoff or a t-test mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SelectionRule {
    Alb(CutoffRule),
    TTest(TTestScreenMode),
}

/// Per-feature statistics carried along with a screening decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FeatureStats {
    Alb(Vec<AlbResult>),
    TTest(Vec<TTestResult>),
}

/// Permuted-label statistic sample approximating the null distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSample {
    pub values: Vec<f64>,
    pub covariates: usize,
    pub permutations_per_covariate: usize,
    pub seed: u64,
}

/// Digest of a [`NullSample`] small enough to embed in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub count: usize,
    pub covariates: usize,
    pub permutations_per_covariate: usize,
    pub seed: u64,
    pub min: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
}

impl NullSample {
    pub fn summary(&self) -> NullSummary {
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("null values are not NaN"));
        NullSummary {
            count: sorted.len(),
            covariates: self.covariates,
            permutations_per_covariate: self.permutations_per_covariate,
            seed: self.seed,
            min: sorted[0],
            median: quantile_type7(&sorted, 0.5),
            p95: quantile_type7(&sorted, 0.95),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Outcome of a screening pass: the surviving feature set with provenance.
/// Every selected index is non-degenerate and strictly above the threshold
/// when one exists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningReport {
    /// Selected feature indices in ascending order.
    pub selected: Vec<usize>,
    pub threshold: Option<f64>,
    pub rule: SelectionRule,
    pub stats: FeatureStats,
    pub null_summary: Option<NullSummary>,
}

impl ScreeningReport {
    pub fn alb_results(&self) -> Option<&[AlbResult]> {
        match &self.stats {
            FeatureStats::Alb(rs) => Some(rs),
            FeatureStats::TTest(_) => None,
        }
    }
}

/// Keep the `d` features with the largest statistics; ties break toward the
/// smaller feature index. Requires `d` at most the non-degenerate count.
pub fn top_d_select(results: &[AlbResult], d: usize) -> Result<ScreeningReport> {
    let usable: Vec<&AlbResult> = results.iter().filter(|r| !r.degenerate).collect();
    if d == 0 || d > usable.len() {
        return Err(invalid(format!(
            "top-d of {d} is out of range for {} non-degenerate features",
            usable.len()
        )));
    }
    let mut order: Vec<&AlbResult> = usable;
    order.sort_by(|a, b| {
        b.alb
            .partial_cmp(&a.alb)
            .expect("statistics are not NaN")
            .then(a.feature_index.cmp(&b.feature_index))
    });
    let mut selected: Vec<usize> = order[..d].iter().map(|r| r.feature_index).collect();
    selected.sort_unstable();
    Ok(ScreeningReport {
        selected,
        threshold: None,
        rule: SelectionRule::Alb(CutoffRule::TopD { d }),
        stats: FeatureStats::Alb(results.to_vec()),
        null_summary: None,
    })
}

/// Keep features with strictly positive statistics.
pub fn zero_select(results: &[AlbResult]) -> ScreeningReport {
    let selected: Vec<usize> = results
        .iter()
        .filter(|r| !r.degenerate && r.alb > 0.0)
        .map(|r| r.feature_index)
        .collect();
    ScreeningReport {
        selected,
        threshold: Some(0.0),
        rule: SelectionRule::Alb(CutoffRule::Zero),
        stats: FeatureStats::Alb(results.to_vec()),
        null_summary: None,
    }
}

/// Build a permutation null: sample `covariates` features without
/// replacement, permute the labels `permutations` times for each, and
/// recompute the statistic with the feature's pooled plug-in bandwidth
/// (unchanged by permutation, since it depends only on pooled values).
///
/// One substream per (feature, permutation) pair keeps the output identical
/// for any worker count.
pub fn permutation_null(
    dataset: &Dataset,
    covariates: usize,
    permutations: usize,
    seed: u64,
) -> Result<NullSample> {
    let p = dataset.n_features();
    if covariates == 0 || covariates > p {
        return Err(invalid(format!(
            "covariate count {covariates} out of range for {p} features"
        )));
    }
    if permutations == 0 {
        return Err(invalid("need at least one permutation per covariate"));
    }
    dataset.require_two_classes(2)?;

    let mut select_rng = substream_rng(seed, &[NULL_SELECT_TAG]);
    let chosen = sample_without_replacement(&mut select_rng, p, covariates);
    let rows = dataset.n_rows();

    let values: Vec<f64> = chosen
        .par_iter()
        .flat_map_iter(|&j| (0..permutations).map(move |t| (j, t)))
        .map(|(j, t)| {
            let col = dataset.column(j);
            let bw = plugin_bandwidth(col, rows).expect("row count validated");
            let mut labels = dataset.labels().to_vec();
            let mut rng = substream_rng(seed, &[NULL_PERM_TAG, j as u64, t as u64]);
            labels.shuffle(&mut rng);
            let feature = LabeledFeature::new(col, &labels).expect("classes validated");
            alb_statistic(&feature, &bw).alb
        })
        .collect();

    Ok(NullSample {
        values,
        covariates,
        permutations_per_covariate: permutations,
        seed,
    })
}

/// Keep features above the (1 - alpha) type-7 quantile of the null sample.
pub fn percentile_select(
    results: &[AlbResult],
    null: &NullSample,
    alpha: f64,
) -> Result<ScreeningReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha {alpha} must be in (0, 1)")));
    }
    if null.values.is_empty() {
        return Err(invalid("empty null sample"));
    }
    let mut sorted = null.values.clone();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("null values are not NaN"));
    let threshold = quantile_type7(&sorted, 1.0 - alpha);
    let selected: Vec<usize> = results
        .iter()
        .filter(|r| !r.degenerate && r.alb > threshold)
        .map(|r| r.feature_index)
        .collect();
    Ok(ScreeningReport {
        selected,
        threshold: Some(threshold),
        rule: SelectionRule::Alb(CutoffRule::Percentile {
            alpha,
            covariates: null.covariates,
            permutations: null.permutations_per_covariate,
            seed: null.seed,
        }),
        stats: FeatureStats::Alb(results.to_vec()),
        null_summary: Some(null.summary()),
    })
}

/// Cross-validated cutoff: screen `train_a` at each candidate, fit the KDE
/// Bayes classifier on the survivors, score accuracy on `train_b`, and take
/// the largest candidate among the maximizers (fewest surviving features).
/// The returned screening applies that cutoff to the pooled rows of both
/// sets. Candidates that keep nothing on `train_a` are not scored; if none
/// keeps anything the error signals that no cutoff is viable.
pub fn cv_select(
    train_a: &Dataset,
    train_b: &Dataset,
    candidates: &[f64],
) -> Result<ScreeningReport> {
    if candidates.is_empty() || candidates.len() > 10 {
        return Err(invalid(format!(
            "need between 1 and 10 candidate cutoffs, have {}",
            candidates.len()
        )));
    }
    train_a.require_two_classes(2)?;
    train_b.require_two_classes(2)?;

    let alb_a = alb_all(train_a)?;
    let mut best: Option<(f64, f64)> = None; // (rand index, cutoff)
    for &cutoff in candidates {
        let selected: Vec<usize> = alb_a
            .iter()
            .filter(|r| !r.degenerate && r.alb > cutoff)
            .map(|r| r.feature_index)
            .collect();
        if selected.is_empty() {
            continue;
        }
        let model = bayes::fit(train_a, &selected)?;
        let predictions = model.predict_dataset(train_b)?;
        let labels: Vec<u8> = predictions.iter().map(|p| p.label).collect();
        let score = rand_index(&labels, train_b.labels())?;
        let better = match best {
            None => true,
            Some((best_score, best_cutoff)) => {
                score > best_score || (score == best_score && cutoff > best_cutoff)
            }
        };
        if better {
            best = Some((score, cutoff));
        }
    }
    let (_, best_cutoff) = best.ok_or(Error::NoViableCutoff)?;

    let pooled = Dataset::vstack(train_a, train_b)?;
    let alb_pooled = alb_all(&pooled)?;
    let selected: Vec<usize> = alb_pooled
        .iter()
        .filter(|r| !r.degenerate && r.alb > best_cutoff)
        .map(|r| r.feature_index)
        .collect();
    Ok(ScreeningReport {
        selected,
        threshold: Some(best_cutoff),
        rule: SelectionRule::Alb(CutoffRule::CrossValidated {
            candidates: candidates.to_vec(),
        }),
        stats: FeatureStats::Alb(alb_pooled),
        null_summary: None,
    })
}

/// Default candidate grid for cross-validation: zero plus the quartiles of
/// the observed positive statistics, deduplicated (at most 4 values).
pub fn default_cv_candidates(results: &[AlbResult]) -> Vec<f64> {
    let mut positive: Vec<f64> = results
        .iter()
        .filter(|r| !r.degenerate && r.alb > 0.0)
        .map(|r| r.alb)
        .collect();
    let mut candidates = vec![0.0];
    if !positive.is_empty() {
        positive.sort_unstable_by(|a, b| a.partial_cmp(b).expect("not NaN"));
        for q in [0.25, 0.5, 0.75] {
            candidates.push(quantile_type7(&positive, q));
        }
    }
    candidates.sort_unstable_by(|a, b| a.partial_cmp(b).expect("not NaN"));
    candidates.dedup();
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandwidth::{Bandwidth, ScaleSource};
    use crate::rng::{standard_normal, substream_rng};

    fn result(index: usize, alb: f64) -> AlbResult {
        AlbResult {
            feature_index: index,
            alb,
            bandwidth: Bandwidth {
                value: 0.1,
                source: ScaleSource::RobustIqr,
            },
            degenerate: false,
        }
    }

    fn degenerate(index: usize) -> AlbResult {
        AlbResult {
            feature_index: index,
            alb: 0.0,
            bandwidth: Bandwidth {
                value: 0.0,
                source: ScaleSource::Degenerate,
            },
            degenerate: true,
        }
    }

    #[test]
    fn top_d_selects_largest_values() {
        let rs = [result(0, 0.5), result(1, 0.1), result(2, -0.2), result(3, 0.3)];
        let report = top_d_select(&rs, 2).unwrap();
        assert_eq!(report.selected, vec![0, 3]);
    }

    #[test]
    fn top_d_breaks_ties_by_index() {
        let rs = [result(0, 0.5), result(1, 0.5), result(2, 0.1)];
        let report = top_d_select(&rs, 1).unwrap();
        assert_eq!(report.selected, vec![0]);
    }

    #[test]
    fn top_d_full_selection_and_range_errors() {
        let rs = [result(0, 0.5), result(1, 0.1), degenerate(2)];
        let report = top_d_select(&rs, 2).unwrap();
        assert_eq!(report.selected, vec![0, 1]);
        assert!(top_d_select(&rs, 3).is_err());
        assert!(top_d_select(&rs, 0).is_err());
    }

    #[test]
    fn top_d_selection_is_invariant_to_input_order() {
        let rs = [result(0, 0.5), result(1, 0.5), result(2, 0.7), result(3, -0.1)];
        let mut reversed = rs;
        reversed.reverse();
        let a = top_d_select(&rs, 2).unwrap();
        let b = top_d_select(&reversed, 2).unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.selected, vec![0, 2]);
    }

    #[test]
    fn zero_select_is_strict_and_skips_degenerates() {
        let rs = [result(0, 0.2), result(1, -0.1), result(2, 0.0), degenerate(3)];
        let report = zero_select(&rs);
        assert_eq!(report.selected, vec![0]);
        assert_eq!(report.threshold, Some(0.0));

        let all_negative = [result(0, -0.2), result(1, -0.4)];
        assert!(zero_select(&all_negative).selected.is_empty());
    }

    #[test]
    fn percentile_threshold_uses_type7_quantile() {
        let null = NullSample {
            values: vec![-0.1, 0.0, 0.1, 0.2],
            covariates: 4,
            permutations_per_covariate: 1,
            seed: 0,
        };
        let rs = [result(0, 0.18), result(1, 0.1)];
        let report = percentile_select(&rs, &null, 0.25).unwrap();
        assert!((report.threshold.unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(report.selected, vec![0]);
    }

    #[test]
    fn percentile_with_constant_null() {
        let null = NullSample {
            values: vec![0.3; 10],
            covariates: 10,
            permutations_per_covariate: 1,
            seed: 0,
        };
        let rs = [result(0, 0.31), result(1, 0.3), result(2, 0.29)];
        let report = percentile_select(&rs, &null, 0.1).unwrap();
        assert_eq!(report.threshold, Some(0.3));
        assert_eq!(report.selected, vec![0]);
    }

    #[test]
    fn percentile_monotone_in_alpha() {
        let mut rng = substream_rng(8, &[0]);
        let null = NullSample {
            values: (0..200).map(|_| standard_normal(&mut rng) * 0.1).collect(),
            covariates: 100,
            permutations_per_covariate: 2,
            seed: 8,
        };
        let rs: Vec<AlbResult> = (0..50)
            .map(|i| result(i, standard_normal(&mut rng) * 0.1))
            .collect();
        let tight = percentile_select(&rs, &null, 0.01).unwrap();
        let loose = percentile_select(&rs, &null, 0.3).unwrap();
        assert!(tight.selected.iter().all(|i| loose.selected.contains(i)));
    }

    fn null_dataset(seed: u64, rows: usize, p: usize) -> Dataset {
        let mut rng = substream_rng(seed, &[100]);
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..rows).map(|_| standard_normal(&mut rng)).collect())
            .collect();
        let labels: Vec<u8> = (0..rows).map(|i| u8::from(i >= rows / 2)).collect();
        Dataset::from_columns(columns, labels).unwrap()
    }

    #[test]
    fn permutation_null_is_deterministic_and_sized() {
        let d = null_dataset(3, 12, 8);
        let a = permutation_null(&d, 8, 2, 77).unwrap();
        let b = permutation_null(&d, 8, 2, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 16);
        let c = permutation_null(&d, 8, 2, 78).unwrap();
        assert_ne!(a.values, c.values);
        assert!(permutation_null(&d, 9, 2, 1).is_err());
        assert!(permutation_null(&d, 0, 2, 1).is_err());
    }

    #[test]
    fn cv_single_zero_candidate_matches_zero_select_on_pool() {
        let mut rng = substream_rng(9, &[5]);
        let rows = 16;
        let labels: Vec<u8> = (0..rows).map(|i| u8::from(i >= 8)).collect();
        // One separated feature plus two null features.
        let mut col0: Vec<f64> = (0..rows).map(|_| standard_normal(&mut rng) * 0.2).collect();
        for (i, v) in col0.iter_mut().enumerate() {
            if i >= 8 {
                *v += 6.0;
            }
        }
        let columns = vec![
            col0,
            (0..rows).map(|_| standard_normal(&mut rng)).collect(),
            (0..rows).map(|_| standard_normal(&mut rng)).collect(),
        ];
        let d = Dataset::from_columns(columns, labels).unwrap();
        let (a, b) = crate::dataio::stratified_split(&d, 0.5, 11).unwrap();

        let report = cv_select(&a, &b, &[0.0]).unwrap();
        assert_eq!(report.threshold, Some(0.0));
        let pooled = Dataset::vstack(&a, &b).unwrap();
        let direct = zero_select(&alb_all(&pooled).unwrap());
        assert_eq!(report.selected, direct.selected);
    }

    #[test]
    fn cv_ties_choose_largest_cutoff() {
        // With one overwhelming feature, every candidate below its statistic
        // ties at perfect accuracy; the largest candidate must win.
        let rows = 20;
        let labels: Vec<u8> = (0..rows).map(|i| u8::from(i >= 10)).collect();
        let mut rng = substream_rng(14, &[2]);
        // Jitter keeps the feature non-constant within each class.
        let col0: Vec<f64> = (0..rows)
            .map(|i| if i >= 10 { 10.0 } else { 0.0 } + 0.01 * standard_normal(&mut rng))
            .collect();
        let col1: Vec<f64> = (0..rows).map(|_| standard_normal(&mut rng)).collect();
        let d = Dataset::from_columns(vec![col0, col1], labels).unwrap();
        let (a, b) = crate::dataio::stratified_split(&d, 0.5, 4).unwrap();
        let report = cv_select(&a, &b, &[0.0, 0.1, 0.2]).unwrap();
        assert_eq!(report.threshold, Some(0.2));
    }

    #[test]
    fn cv_errors_when_no_candidate_keeps_anything() {
        let d = null_dataset(6, 12, 4);
        let (a, b) = crate::dataio::stratified_split(&d, 0.5, 5).unwrap();
        let err = cv_select(&a, &b, &[10.0]).unwrap_err();
        assert!(matches!(err, Error::NoViableCutoff));
    }

    #[test]
    fn default_candidates_contain_zero_and_are_sorted() {
        let rs = [result(0, 0.4), result(1, -0.2), result(2, 0.1), result(3, 0.9)];
        let c = default_cv_candidates(&rs);
        assert!(c.contains(&0.0));
        assert!(c.len() <= 10);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        let none_positive = [result(0, -0.4)];
        assert_eq!(default_cv_candidates(&none_positive), vec![0.0]);
    }
}
