//! Kernel functions and kernel density evaluation, including leave-one-out
//! evaluation at a held-out sample point.
//!
//! The working kernel is the heavy-tailed Hall kernel
//!
//! ```text
//! K0(z) = exp(-(log(1 + |z|))^2 / 2) / (sqrt(8*pi*e) * Phi(1))
//! ```
//!
//! whose log-normal-like tails keep log-density ratios stable far from the
//! data. A Gaussian kernel is available for diagnostics only.
//!
//! Leave-one-out estimates are normalized by (number of terms actually
//! summed) * bandwidth, so each estimate is a proper average of scaled
//! kernel evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Standard normal CDF at 1, fixed to 16 significant digits so the kernel
/// hot path needs no erf evaluation.
pub const GAUSS_CDF_AT_ONE: f64 = 0.8413447460685429;

/// Hall kernel normalizer 1 / (sqrt(8*pi*e) * Phi(1)), which is also K0(0).
pub const HALL_NORMALIZER: f64 = 0.14379998546958918;

const HALL_LOG_NORMALIZER: f64 = -1.9393319347411682;
const GAUSS_NORMALIZER: f64 = 0.3989422804014327;
const GAUSS_LOG_NORMALIZER: f64 = -0.9189385332046727;

/// Kernel selector. Hall is the default everywhere; Gaussian exists only for
/// diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    #[default]
    Hall,
    Gaussian,
}

impl Kernel {
    /// Kernel value at `z` without input validation.
    #[inline]
    pub(crate) fn eval_unchecked(self, z: f64) -> f64 {
        match self {
            Kernel::Hall => {
                let t = z.abs().ln_1p();
                HALL_NORMALIZER * (-0.5 * t * t).exp()
            }
            Kernel::Gaussian => GAUSS_NORMALIZER * (-0.5 * z * z).exp(),
        }
    }

    /// log K(z) without input validation; finite for every finite `z`.
    #[inline]
    pub(crate) fn log_eval_unchecked(self, z: f64) -> f64 {
        match self {
            Kernel::Hall => {
                let t = z.abs().ln_1p();
                HALL_LOG_NORMALIZER - 0.5 * t * t
            }
            Kernel::Gaussian => GAUSS_LOG_NORMALIZER - 0.5 * z * z,
        }
    }
}

/// Hall kernel K0 at `z`. Strictly positive and symmetric in `z`.
pub fn hall_kernel(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::NonFinite("hall_kernel argument"));
    }
    Ok(Kernel::Hall.eval_unchecked(z))
}

/// Kernel density estimate at `x` from `points` with bandwidth `b`:
/// the average of K((x - p)/b) / b over all points.
pub fn kde_eval(x: f64, points: &[f64], bandwidth: f64, kernel: Kernel) -> Result<f64> {
    if points.is_empty() {
        return Err(invalid("kde_eval: empty point set"));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(invalid(format!("kde_eval: bandwidth {bandwidth} must be positive")));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("kde_eval point"));
    }
    let sum: f64 = points
        .iter()
        .map(|&p| kernel.eval_unchecked((x - p) / bandwidth))
        .sum();
    Ok(sum / (points.len() as f64 * bandwidth))
}

/// Leave-one-out density at `points[i]`, estimated from the other
/// `len - 1` points and normalized by `(len - 1) * b`.
pub fn loo_density(i: usize, points: &[f64], bandwidth: f64, kernel: Kernel) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid("loo_density: need at least 2 points"));
    }
    if i >= points.len() {
        return Err(invalid(format!(
            "loo_density: index {i} out of range for {} points",
            points.len()
        )));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(invalid(format!(
            "loo_density: bandwidth {bandwidth} must be positive"
        )));
    }
    let x = points[i];
    let sum: f64 = points
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != i)
        .map(|(_, &p)| kernel.eval_unchecked((x - p) / bandwidth))
        .sum();
    Ok(sum / ((points.len() - 1) as f64 * bandwidth))
}
