//! Scripted simulation experiments: statistic CDF separation, screening
//! method comparisons, and the classifier accuracy curve.
//!
//! Every experiment is a pure function of its spec (seed included), emitting
//! tidy records that downstream plotting can consume. Replications run in
//! parallel; per-replication seeds derive from the spec seed by index, so
//! output is identical for any worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alb::alb_all;
use crate::bayes;
use crate::cutoff::{percentile_select, permutation_null, zero_select};
use crate::dataio::Dataset;
use crate::error::{invalid, Result};
use crate::metrics::rand_index;
use crate::rng::substream_seed;
use crate::simgen::{draw_importance_mask, generate_with_mask, Scenario};
use crate::ttest::{ttest_screen, TTestScreenMode};

const MASK_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;
const PERM_STREAM: u64 = 3;

// ---------------------------------------------------------------------------
// CDF separation study
// ---------------------------------------------------------------------------

/// Which population a statistic value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CdfGroup {
    Important,
    Unimportant,
    Permuted,
}

impl CdfGroup {
    pub fn name(&self) -> &'static str {
        match self {
            CdfGroup::Important => "important",
            CdfGroup::Unimportant => "unimportant",
            CdfGroup::Permuted => "permuted",
        }
    }
}

/// Spec for the CDF study: shape-difference data at several balanced training
/// sizes, with a permuted group of `permutations` label shuffles per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfStudySpec {
    pub sizes: Vec<usize>,
    pub p: usize,
    pub r: f64,
    pub permutations: usize,
    pub seed: u64,
}

impl Default for CdfStudySpec {
    fn default() -> Self {
        CdfStudySpec {
            sizes: vec![10, 20, 40],
            p: 500,
            r: 0.5,
            permutations: 3,
            seed: 0,
        }
    }
}

/// One emitted value: the statistic of one feature (or one permutation), with
/// the balanced per-class training size it was computed at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub size: usize,
    pub group: CdfGroup,
    pub alb: f64,
}

/// Run the CDF study; within each (size, group) the values are sorted
/// ascending, ready for empirical-CDF plotting.
pub fn run_cdf_study(spec: &CdfStudySpec) -> Result<Vec<CdfRow>> {
    if spec.sizes.is_empty() {
        return Err(invalid("size grid is empty"));
    }
    let mut rows = Vec::new();
    for &size in &spec.sizes {
        let size_seed = substream_seed(spec.seed, &[size as u64]);
        let mask = draw_importance_mask(spec.p, spec.r, substream_seed(size_seed, &[MASK_STREAM]))?;
        let data = generate_with_mask(
            Scenario::Shape,
            size,
            size,
            &mask,
            substream_seed(size_seed, &[TRAIN_STREAM]),
        )?;
        let albs = alb_all(&data)?;

        let mut important: Vec<f64> = Vec::new();
        let mut unimportant: Vec<f64> = Vec::new();
        for r in &albs {
            if mask[r.feature_index] {
                important.push(r.alb);
            } else {
                unimportant.push(r.alb);
            }
        }
        let null = permutation_null(
            &data,
            spec.p,
            spec.permutations,
            substream_seed(size_seed, &[PERM_STREAM]),
        )?;
        let mut permuted = null.values;

        for (group, values) in [
            (CdfGroup::Important, &mut important),
            (CdfGroup::Unimportant, &mut unimportant),
            (CdfGroup::Permuted, &mut permuted),
        ] {
            values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("not NaN"));
            rows.extend(values.iter().map(|&alb| CdfRow { size, group, alb }));
        }
    }
    Ok(rows)
}

pub fn write_cdf_csv<W: Write>(rows: &[CdfRow], out: &mut W) -> Result<()> {
    writeln!(out, "size,group,alb")?;
    for row in rows {
        writeln!(out, "{},{},{}", row.size, row.group.name(), row.alb)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Screening comparison
// ---------------------------------------------------------------------------

/// Screening arms of the comparison experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScreenMethod {
    NoScreen,
    TTest,
    Alb,
}

impl ScreenMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ScreenMethod::NoScreen => "none",
            ScreenMethod::TTest => "ttest",
            ScreenMethod::Alb => "alb",
        }
    }
}

/// Spec for the screening-vs-classifier comparison. The t-test arm keeps
/// p-values below `ttest_alpha`; the statistic arm keeps values above the
/// (1 - alb_alpha) percentile of a permutation null with `alb_permutations`
/// label shuffles per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSpec {
    pub scenario: Scenario,
    pub p: usize,
    pub r: f64,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub ttest_alpha: f64,
    pub alb_alpha: f64,
    pub alb_permutations: usize,
    pub seed: u64,
}

impl CompareSpec {
    /// The reference protocol for a scenario: p = 600 features, the
    /// scenario's importance rate, p-value cutoff 0.05, statistic cutoff at
    /// the 95th percentile of two permutations per feature.
    pub fn for_scenario(scenario: Scenario, sizes: Vec<usize>, replications: usize, seed: u64) -> Self {
        let r = match scenario {
            Scenario::Location => 0.05,
            Scenario::Scale => 0.20,
            Scenario::Shape => 0.10,
        };
        CompareSpec {
            scenario,
            p: 600,
            r,
            sizes,
            replications,
            ttest_alpha: 0.05,
            alb_alpha: 0.05,
            alb_permutations: 2,
            seed,
        }
    }
}

/// One replication-method record of the comparison experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub scenario: Scenario,
    pub size: usize,
    pub replication: usize,
    pub method: ScreenMethod,
    pub rand_index: f64,
    /// Fraction of truly important features surviving the screen.
    pub important_fraction: f64,
    /// Fraction of unimportant features surviving the screen.
    pub unimportant_fraction: f64,
    pub selected_count: usize,
    /// Derived seed of this replication, for standalone recomputation.
    pub replication_seed: u64,
}

fn survival_fractions(selected: &[usize], mask: &[bool]) -> (f64, f64) {
    let important_total = mask.iter().filter(|&&m| m).count();
    let unimportant_total = mask.len() - important_total;
    let important_kept = selected.iter().filter(|&&j| mask[j]).count();
    let unimportant_kept = selected.len() - important_kept;
    let fi = if important_total == 0 {
        1.0
    } else {
        important_kept as f64 / important_total as f64
    };
    let fu = if unimportant_total == 0 {
        0.0
    } else {
        unimportant_kept as f64 / unimportant_total as f64
    };
    (fi, fu)
}

fn classify_with_selection(
    train: &Dataset,
    test: &Dataset,
    selected: &[usize],
) -> Result<f64> {
    let model = bayes::fit(train, selected)?;
    let predictions = model.predict_dataset(test)?;
    let labels: Vec<u8> = predictions.iter().map(|p| p.label).collect();
    rand_index(&labels, test.labels())
}

/// Run the comparison: for each size and replication, generate a train/test
/// pair sharing one importance mask, screen the training set with each arm,
/// fit the KDE Bayes classifier on the survivors, and score the test set.
pub fn run_screen_compare(spec: &CompareSpec) -> Result<Vec<CompareRow>> {
    if spec.sizes.is_empty() || spec.replications == 0 {
        return Err(invalid("need a nonempty size grid and at least one replication"));
    }
    let tasks: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&s| (0..spec.replications).map(move |rep| (s, rep)))
        .collect();

    let nested: Vec<Vec<CompareRow>> = tasks
        .par_iter()
        .map(|&(size, rep)| -> Result<Vec<CompareRow>> {
            let rep_seed =
                substream_seed(spec.seed, &[spec.scenario as u64, size as u64, rep as u64]);
            let mask =
                draw_importance_mask(spec.p, spec.r, substream_seed(rep_seed, &[MASK_STREAM]))?;
            let train = generate_with_mask(
                spec.scenario,
                size,
                size,
                &mask,
                substream_seed(rep_seed, &[TRAIN_STREAM]),
            )?;
            let test = generate_with_mask(
                spec.scenario,
                size,
                size,
                &mask,
                substream_seed(rep_seed, &[TEST_STREAM]),
            )?;

            let all_features: Vec<usize> = (0..spec.p).collect();
            let ttest_report = ttest_screen(&train, TTestScreenMode::PValueBelow(spec.ttest_alpha))?;
            let albs = alb_all(&train)?;
            let null = permutation_null(
                &train,
                spec.p,
                spec.alb_permutations,
                substream_seed(rep_seed, &[PERM_STREAM]),
            )?;
            let alb_report = percentile_select(&albs, &null, spec.alb_alpha)?;

            let mut rows = Vec::with_capacity(3);
            for (method, selected) in [
                (ScreenMethod::NoScreen, &all_features),
                (ScreenMethod::TTest, &ttest_report.selected),
                (ScreenMethod::Alb, &alb_report.selected),
            ] {
                let rand = classify_with_selection(&train, &test, selected)?;
                let (fi, fu) = survival_fractions(selected, &mask);
                rows.push(CompareRow {
                    scenario: spec.scenario,
                    size,
                    replication: rep,
                    method,
                    rand_index: rand,
                    important_fraction: fi,
                    unimportant_fraction: fu,
                    selected_count: selected.len(),
                    replication_seed: rep_seed,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(nested.into_iter().flatten().collect())
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: &mut W) -> Result<()> {
    writeln!(
        out,
        "scenario,size,replication,method,rand_index,important_fraction,unimportant_fraction,selected_count,replication_seed"
    )?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.scenario.name(),
            row.size,
            row.replication,
            row.method.name(),
            row.rand_index,
            row.important_fraction,
            row.unimportant_fraction,
            row.selected_count,
            row.replication_seed
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Classifier accuracy curve
// ---------------------------------------------------------------------------

/// Spec for the classifier accuracy curve: shape-difference data, zero
/// cutoff, balanced test set of the same size as the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesCurveSpec {
    pub sizes: Vec<usize>,
    pub p: usize,
    pub r: f64,
    pub replications: usize,
    pub seed: u64,
}

/// One replication of the accuracy curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesCurveRow {
    pub size: usize,
    pub replication: usize,
    pub rand_index: f64,
    pub selected_count: usize,
    pub replication_seed: u64,
}

/// Run the accuracy curve: screen at cutoff zero, fit, and score a balanced
/// equal-size test set.
pub fn run_bayes_curve(spec: &BayesCurveSpec) -> Result<Vec<BayesCurveRow>> {
    if spec.sizes.is_empty() || spec.replications == 0 {
        return Err(invalid("need a nonempty size grid and at least one replication"));
    }
    let tasks: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&s| (0..spec.replications).map(move |rep| (s, rep)))
        .collect();

    tasks
        .par_iter()
        .map(|&(size, rep)| -> Result<BayesCurveRow> {
            let rep_seed = substream_seed(spec.seed, &[size as u64, rep as u64]);
            let mask =
                draw_importance_mask(spec.p, spec.r, substream_seed(rep_seed, &[MASK_STREAM]))?;
            let train = generate_with_mask(
                Scenario::Shape,
                size,
                size,
                &mask,
                substream_seed(rep_seed, &[TRAIN_STREAM]),
            )?;
            let test = generate_with_mask(
                Scenario::Shape,
                size,
                size,
                &mask,
                substream_seed(rep_seed, &[TEST_STREAM]),
            )?;
            let report = zero_select(&alb_all(&train)?);
            let rand = classify_with_selection(&train, &test, &report.selected)?;
            Ok(BayesCurveRow {
                size,
                replication: rep,
                rand_index: rand,
                selected_count: report.selected.len(),
                replication_seed: rep_seed,
            })
        })
        .collect()
}

pub fn write_bayes_curve_csv<W: Write>(rows: &[BayesCurveRow], out: &mut W) -> Result<()> {
    writeln!(out, "size,replication,rand_index,selected_count,replication_seed")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.size, row.replication, row.rand_index, row.selected_count, row.replication_seed
        )?;
    }
    Ok(())
}
