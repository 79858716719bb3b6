//! Welch two-sample t-test screening baseline.
//!
//! The statistic uses unequal-variance standard errors with the
//! Welch-Satterthwaite degrees of freedom, and two-sided p-values from the
//! Student t distribution. Tail probabilities are evaluated through the
//! regularized incomplete beta function (continued fraction), accurate to
//! about 1e-12, so golden p-values are portable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::{FeatureStats, ScreeningReport, SelectionRule};
use crate::dataio::Dataset;
use crate::error::{invalid, Result};

/// Welch test outcome for one feature. `p_value` is two-sided and equals 1
/// when `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub feature_index: usize,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Selection mode for t-test screening.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TTestScreenMode {
    /// Keep features with two-sided p-value strictly below the level.
    PValueBelow(f64),
    /// Keep the k largest |t| statistics, ties broken by smaller index.
    TopK(usize),
}

fn mean_and_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch two-sample t-test of `x0` against `x1`.
///
/// Both samples constant and equal gives `p = 1`; both constant but
/// different gives `p = 0` with an infinite statistic.
pub fn welch_t(x0: &[f64], x1: &[f64]) -> Result<TTestResult> {
    if x0.len() < 2 || x1.len() < 2 {
        return Err(invalid(format!(
            "welch_t: both samples need at least 2 values, have {} and {}",
            x0.len(),
            x1.len()
        )));
    }
    let (m0, v0) = mean_and_var(x0);
    let (m1, v1) = mean_and_var(x1);
    let (n0, n1) = (x0.len() as f64, x1.len() as f64);
    let se2 = v0 / n0 + v1 / n1;
    let fallback_df = n0 + n1 - 2.0;
    if se2 == 0.0 {
        // Zero combined variance: conventions instead of errors.
        return Ok(if m0 == m1 {
            TTestResult { feature_index: 0, t: 0.0, df: fallback_df, p_value: 1.0 }
        } else {
            TTestResult {
                feature_index: 0,
                t: (m0 - m1).signum() * f64::INFINITY,
                df: fallback_df,
                p_value: 0.0,
            }
        });
    }
    let t = (m0 - m1) / se2.sqrt();
    let df = se2 * se2 / ((v0 / n0).powi(2) / (n0 - 1.0) + (v1 / n1).powi(2) / (n1 - 1.0));
    let p_value = student_t_two_sided_p(t, df);
    Ok(TTestResult { feature_index: 0, t, df, p_value })
}

/// Screen every feature of a dataset by Welch t-test.
pub fn ttest_screen(dataset: &Dataset, mode: TTestScreenMode) -> Result<ScreeningReport> {
    dataset.require_two_classes(2)?;
    let results: Vec<TTestResult> = dataset
        .columns()
        .par_iter()
        .enumerate()
        .map(|(j, col)| {
            let x0: Vec<f64> = col
                .iter()
                .zip(dataset.labels())
                .filter(|&(_, &l)| l == 0)
                .map(|(&v, _)| v)
                .collect();
            let x1: Vec<f64> = col
                .iter()
                .zip(dataset.labels())
                .filter(|&(_, &l)| l == 1)
                .map(|(&v, _)| v)
                .collect();
            let mut r = welch_t(&x0, &x1).expect("class sizes validated");
            r.feature_index = j;
            r
        })
        .collect();

    let (selected, threshold) = match mode {
        TTestScreenMode::PValueBelow(alpha) => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(invalid(format!("p-value level {alpha} must be in (0, 1)")));
            }
            let sel: Vec<usize> = results
                .iter()
                .filter(|r| r.p_value < alpha)
                .map(|r| r.feature_index)
                .collect();
            (sel, Some(alpha))
        }
        TTestScreenMode::TopK(k) => {
            if k == 0 || k > results.len() {
                return Err(invalid(format!(
                    "top-k of {k} is out of range for {} features",
                    results.len()
                )));
            }
            let mut order: Vec<usize> = (0..results.len()).collect();
            order.sort_by(|&a, &b| {
                results[b]
                    .t
                    .abs()
                    .partial_cmp(&results[a].t.abs())
                    .expect("t statistics are not NaN")
                    .then(a.cmp(&b))
            });
            let mut sel: Vec<usize> = order.into_iter().take(k).collect();
            sel.sort_unstable();
            (sel, None)
        }
    };

    Ok(ScreeningReport {
        selected,
        threshold,
        rule: SelectionRule::TTest(mode),
        stats: FeatureStats::TTest(results),
        null_summary: None,
    })
}

/// Two-sided Student-t p-value: I_{df/(df+t^2)}(df/2, 1/2).
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    debug_assert!(df > 0.0);
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

/// ln Gamma via the Lanczos approximation (g = 7, 9 coefficients).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(a, b, x)) / a
    } else {
        1.0 - (ln_front.exp() * beta_cf(b, a, 1.0 - x)) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
