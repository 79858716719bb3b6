//! Screening features of two-class data with an average log-Bayes-factor
//! statistic built from leave-one-out kernel density estimates.
//!
//! The crate provides:
//!
//! - the heavy-tailed Hall kernel and leave-one-out KDE machinery ([`kernel`]);
//! - robust plug-in bandwidths ([`bandwidth`]);
//! - the per-feature screening statistic and its finite upper bound ([`alb`]);
//! - four cutoff strategies, including a permutation null ([`cutoff`]);
//! - a Welch t-test screening baseline ([`ttest`]);
//! - a KDE Bayes classifier over the surviving features ([`bayes`]);
//! - synthetic location/scale/shape scenario generators ([`simgen`]);
//! - classification and screening quality metrics ([`metrics`]);
//! - CSV ingestion, constant-column removal, stratified splits ([`dataio`]);
//! - reproducible experiment harnesses emitting tidy records ([`experiments`]).
//!
//! All randomized operations take explicit seeds and produce identical output
//! for any thread count.

pub mod alb;
pub mod bandwidth;
pub mod bayes;
pub mod cutoff;
pub mod dataio;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod metrics;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod rng;
pub mod simgen;
pub mod ttest;

pub use error::{Error, Result};
