//! Run reports: everything needed to reproduce a run bit-for-bit, plus an
//! isolated timing block that determinism checks can mask out.

use std::fs;
use std::path::Path;

use serde::Serialize;

use albscreen_core::cutoff::{FeatureStats, NullSummary, SelectionRule};
use albscreen_core::metrics::ConfusionCounts;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// FNV-1a 64-bit hash of a byte stream, hex encoded. Stable across platforms.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

pub fn hash_file(path: &Path) -> std::io::Result<String> {
    Ok(fnv1a64_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub fnv1a64: String,
    pub rows: usize,
    pub features: usize,
    pub label_mapping: Option<[String; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyMetrics {
    pub rand_index: f64,
    pub confusion_positive_label_1: ConfusionCounts,
}

/// Volatile run-environment fields live in their own subsection so reports
/// can be compared for byte-identity after dropping this one field. The
/// worker count belongs here because output does not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_ms: u128,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed_constant_features: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<SelectionRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature_stats: Option<FeatureStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_summary: Option<NullSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ClassifyMetrics>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: &str, threads: Option<usize>, seed: Option<u64>) -> Self {
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            inputs: Vec::new(),
            removed_constant_features: None,
            method: None,
            rule: None,
            threshold: None,
            selected: None,
            feature_stats: None,
            null_summary: None,
            metrics: None,
            warnings: Vec::new(),
            timing: Timing { total_ms: 0, threads },
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json)?;
        Ok(())
    }
}
