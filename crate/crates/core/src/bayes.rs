//! KDE-based Bayes classifier over screened features, assuming independence
//! between features.
//!
//! For an observation x and surviving feature set D, the class-0 posterior is
//!
//! ```text
//! p(x) = prior0 * prod_{i in D} f_i(x_i)
//!        ---------------------------------------------------------
//!        prior0 * prod_{i in D} f_i(x_i) + prior1 * prod_{i in D} g_i(x_i)
//! ```
//!
//! where f_i and g_i are full-sample per-class kernel density estimates with
//! class-specific plug-in bandwidths, and the priors are proportional to the
//! class counts. Products are evaluated in log space (log-sum-exp per density,
//! two-term softmax at the end), so the posterior stays inside (0, 1) even
//! with thousands of features.
//!
//! The decision rule assigns class 0 iff p(x) > prior0 strictly; with an
//! empty feature set p(x) equals prior0 exactly and the class-1 side wins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::plugin_bandwidth;
use crate::dataio::Dataset;
use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;

const MODEL_SCHEMA_VERSION: u32 = 1;

/// Per-class training data and bandwidths for one selected feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedFeature {
    pub index: usize,
    pub class0: Vec<f64>,
    pub class1: Vec<f64>,
    pub bandwidth0: f64,
    pub bandwidth1: f64,
}

/// A selected feature that had to be dropped at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedFeature {
    pub index: usize,
    pub reason: String,
}

/// One classified row: class-0 posterior and the predicted label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub row: usize,
    pub posterior0: f64,
    pub label: u8,
}

/// Fitted classifier; immutable after [`fit`], serializable as versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesKdeModel {
    pub schema_version: u32,
    pub kernel: Kernel,
    pub prior0: f64,
    pub prior1: f64,
    pub class0_count: usize,
    pub class1_count: usize,
    /// Feature count of the training dataset; prediction inputs must match.
    pub n_features_expected: usize,
    pub features: Vec<FittedFeature>,
    pub dropped: Vec<DroppedFeature>,
}

/// Fit with the Hall kernel (the default everywhere).
pub fn fit(train: &Dataset, selected: &[usize]) -> Result<BayesKdeModel> {
    fit_with_kernel(train, selected, Kernel::Hall)
}

/// Fit per-class KDEs for the selected features. Features that are constant
/// within either class get dropped with a warning record instead of failing
/// the whole fit.
pub fn fit_with_kernel(
    train: &Dataset,
    selected: &[usize],
    kernel: Kernel,
) -> Result<BayesKdeModel> {
    let (n0, n1) = train.require_two_classes(2)?;
    let mut indices: Vec<usize> = selected.to_vec();
    indices.sort_unstable();
    indices.dedup();
    if let Some(&bad) = indices.iter().find(|&&j| j >= train.n_features()) {
        return Err(invalid(format!(
            "selected feature {bad} out of range for {} features",
            train.n_features()
        )));
    }

    let total = (n0 + n1) as f64;
    let mut features = Vec::with_capacity(indices.len());
    let mut dropped = Vec::new();
    for j in indices {
        let class0 = train.column_for_class(j, 0);
        let class1 = train.column_for_class(j, 1);
        let bw0 = plugin_bandwidth(&class0, class0.len())?;
        let bw1 = plugin_bandwidth(&class1, class1.len())?;
        if bw0.is_degenerate() || bw1.is_degenerate() {
            let side = if bw0.is_degenerate() { 0 } else { 1 };
            dropped.push(DroppedFeature {
                index: j,
                reason: format!("constant within class {side}"),
            });
            continue;
        }
        features.push(FittedFeature {
            index: j,
            class0,
            class1,
            bandwidth0: bw0.value,
            bandwidth1: bw1.value,
        });
    }

    Ok(BayesKdeModel {
        schema_version: MODEL_SCHEMA_VERSION,
        kernel,
        prior0: n0 as f64 / total,
        prior1: n1 as f64 / total,
        class0_count: n0,
        class1_count: n1,
        n_features_expected: train.n_features(),
        features,
        dropped,
    })
}

/// log of the KDE density at `x`, via log-sum-exp over log kernel terms.
fn log_density(kernel: Kernel, x: f64, points: &[f64], bandwidth: f64) -> f64 {
    debug_assert!(!points.is_empty());
    let mut max_log = f64::NEG_INFINITY;
    let logs: Vec<f64> = points
        .iter()
        .map(|&p| {
            let l = kernel.log_eval_unchecked((x - p) / bandwidth);
            if l > max_log {
                max_log = l;
            }
            l
        })
        .collect();
    let sum: f64 = logs.iter().map(|&l| (l - max_log).exp()).sum();
    max_log + sum.ln() - (points.len() as f64 * bandwidth).ln()
}

impl BayesKdeModel {
    /// Class-0 posterior for a full feature vector, strictly inside (0, 1).
    pub fn posterior(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features_expected {
            return Err(invalid(format!(
                "feature vector has {} values, model expects {}",
                x.len(),
                self.n_features_expected
            )));
        }
        let mut log0 = self.prior0.ln();
        let mut log1 = self.prior1.ln();
        for f in &self.features {
            let xi = x[f.index];
            if !xi.is_finite() {
                return Err(Error::NonFinite("posterior input"));
            }
            log0 += log_density(self.kernel, xi, &f.class0, f.bandwidth0);
            log1 += log_density(self.kernel, xi, &f.class1, f.bandwidth1);
        }
        // Two-term softmax: p0 = 1 / (1 + exp(log1 - log0)).
        let diff = log1 - log0;
        let p0 = if diff >= 0.0 {
            let e = (-diff).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + diff.exp())
        };
        Ok(p0.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Class 0 iff the class-0 posterior strictly exceeds the class-0 prior.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(if self.posterior(x)? > self.prior0 { 0 } else { 1 })
    }

    /// Classify every row of a dataset; parallel over rows, output in row order.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        if data.n_features() != self.n_features_expected {
            return Err(Error::Schema(format!(
                "dataset has {} features, model expects {}",
                data.n_features(),
                self.n_features_expected
            )));
        }
        (0..data.n_rows())
            .into_par_iter()
            .map(|i| {
                let x = data.row(i);
                let posterior0 = self.posterior(&x)?;
                Ok(Prediction {
                    row: i,
                    posterior0,
                    label: u8::from(!(posterior0 > self.prior0)),
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BayesKdeModel = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("model JSON: {e}")))?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "model schema version {} unsupported (expected {MODEL_SCHEMA_VERSION})",
                model.schema_version
            )));
        }
        Ok(model)
    }
}
