use serde::{Deserialize, Serialize};
use welfare_moments::estimation::{BootstrapInterval, MomentFit};
use welfare_moments::rationality::RationalityVerdict;
use welfare_moments::welfare::WelfareReport;

use crate::config::{config_hash, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config_hash: String,
}

impl Metadata {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: cfg.seed,
            config_hash: config_hash(cfg),
        }
    }
}

/// A bootstrap interval with the quantity it covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInterval {
    pub label: String,
    #[serde(flatten)]
    pub interval: BootstrapInterval,
}

/// Everything a run emits, in sweep order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goods: Option<Vec<String>>,
    #[serde(default)]
    pub reports: Vec<WelfareReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<RationalityVerdict>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fits: Option<Vec<MomentFit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<LabeledInterval>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl ReportBundle {
    pub fn new(metadata: Metadata) -> Self {
        Self {
            metadata,
            goods: None,
            reports: Vec::new(),
            verdicts: None,
            fits: None,
            intervals: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("bundles serialize");
        out.push(b'\n');
        out
    }
}
