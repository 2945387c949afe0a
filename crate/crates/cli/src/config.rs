//! Experiment configs and run records. Records are JSON with wall-clock
//! time in a separate field so the numeric payload is reproducible
//! byte-for-byte given the same config and seed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qavc_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::channel_io::ChannelSpec;

pub const STAGE_NAMES: [&str; 6] = [
    "symmetrize",
    "derandomize",
    "capacity",
    "net",
    "telescope",
    "verify",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in scenario name; mutually exclusive with `channel`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// Inline channel spec; mutually exclusive with `scenario`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    pub pipeline: Vec<String>,
    /// Per-stage parameter maps, keyed by stage name.
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.scenario, &self.channel) {
            (None, None) => {
                return Err(Error::Domain(
                    "config needs either a scenario name or an inline channel".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Domain(
                    "scenario and inline channel are mutually exclusive".into(),
                ))
            }
            _ => {}
        }
        for stage in &self.pipeline {
            if !STAGE_NAMES.contains(&stage.as_str()) {
                return Err(Error::Domain(format!(
                    "unknown pipeline stage '{stage}' (expected one of {STAGE_NAMES:?})"
                )));
            }
        }
        for key in self.params.keys() {
            if !self.pipeline.iter().any(|s| s == key) {
                return Err(Error::Domain(format!(
                    "params for '{key}' but that stage is not in the pipeline"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub ok: bool,
    pub result: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    /// The channel the pipeline actually ran on (scenario channels echoed
    /// explicitly, so the record is self-contained).
    pub resolved_channel: ChannelSpec,
    pub versions: BTreeMap<String, String>,
    /// Unit conventions for every numeric field in the record.
    pub units: BTreeMap<String, String>,
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Timestamp-like field, deliberately outside the deterministic payload.
    pub wall_clock_ms: u128,
}

pub fn unit_notes() -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert(
        "entropy_and_capacity".into(),
        "bits (log base 2) per channel use".into(),
    );
    m.insert("tail_bound_exponent".into(), "nats (natural log)".into());
    m.insert("shared_bits".into(), "base-2 logarithm of the sample count".into());
    m.insert(
        "distance".into(),
        "half diamond norm: d = (1/2)||N1 - N2||_diamond".into(),
    );
    m
}

/// Flattens the numeric leaves of a JSON value into (path, value) rows for
/// the CSV summary.
pub fn numeric_rows(prefix: &str, v: &serde_json::Value, rows: &mut Vec<(String, f64)>) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                rows.push((prefix.to_string(), x));
            }
        }
        serde_json::Value::Bool(b) => rows.push((prefix.to_string(), *b as u8 as f64)),
        serde_json::Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                numeric_rows(&format!("{prefix}[{i}]"), item, rows);
            }
        }
        serde_json::Value::Object(map) => {
            for (k, item) in map {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                numeric_rows(&p, item, rows);
            }
        }
        _ => {}
    }
}
