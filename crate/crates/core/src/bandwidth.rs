//! Plug-in bandwidth rule and robust scale estimation per feature.
//!
//! The plug-in rule is `b = 0.162 * (m+n)^(-1/5) * s`, where `s` is a robust
//! scale estimate IQR/1.35, falling back to the sample standard deviation
//! when the IQR is zero. A feature whose values are all identical has no
//! usable scale and is flagged degenerate instead of erroring.
//!
//! Quartiles use linear interpolation between closest order statistics (the
//! common "type 7" convention); the same convention is reused for permutation
//! null percentiles.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Multiplier of the plug-in rule, fixed from simulation to 3 decimals.
pub const PLUGIN_CONSTANT: f64 = 0.162;

/// IQR-to-standard-deviation conversion for the robust scale.
pub const IQR_TO_SD: f64 = 1.35;

/// Which scale estimate backed a bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleSource {
    RobustIqr,
    SampleSd,
    /// Constant feature: no usable scale; `value` is 0 and must not be used.
    Degenerate,
}

/// A per-feature bandwidth and the scale estimate it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub value: f64,
    pub source: ScaleSource,
}

impl Bandwidth {
    pub fn is_degenerate(&self) -> bool {
        self.source == ScaleSource::Degenerate
    }
}

/// Type-7 quantile of already-sorted values: linear interpolation between
/// the order statistics bracketing `(len - 1) * q`.
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = h - lo as f64;
        sorted[lo] + w * (sorted[hi] - sorted[lo])
    }
}

/// IQR(values) / 1.35 with type-7 quartiles. Zero iff Q1 == Q3.
pub fn robust_scale(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("robust_scale: empty input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-NaN values"));
    let q1 = quantile_type7(&sorted, 0.25);
    let q3 = quantile_type7(&sorted, 0.75);
    Ok((q3 - q1) / IQR_TO_SD)
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Plug-in bandwidth `0.162 * total_count^(-1/5) * s` for one feature.
///
/// `values` is the pooled feature column and `total_count` the pooled sample
/// count. The scale `s` is the robust IQR estimate when positive, the sample
/// standard deviation when the IQR is zero, and the feature is flagged
/// degenerate when both vanish.
pub fn plugin_bandwidth(values: &[f64], total_count: usize) -> Result<Bandwidth> {
    if total_count < 2 {
        return Err(invalid(format!(
            "plugin_bandwidth: total_count {total_count} must be at least 2"
        )));
    }
    let robust = robust_scale(values)?;
    let (scale, source) = if robust > 0.0 {
        (robust, ScaleSource::RobustIqr)
    } else {
        let sd = sample_sd(values);
        if sd > 0.0 {
            (sd, ScaleSource::SampleSd)
        } else {
            return Ok(Bandwidth {
                value: 0.0,
                source: ScaleSource::Degenerate,
            });
        }
    };
    Ok(Bandwidth {
        value: PLUGIN_CONSTANT * (total_count as f64).powf(-0.2) * scale,
        source,
    })
}
