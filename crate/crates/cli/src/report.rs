//! Machine-readable run report.

use std::path::Path;

use finsler_core::connection::ConnectionResiduals;
use finsler_core::recurrence::{CheckStatus, ClassificationReport};
use finsler_core::tensor::TensorDump;
use finsler_core::{CheckReport, Tolerances};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const TOOL: &str = "finsler";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTensors {
    pub g: TensorDump,
    pub spray: Vec<f64>,
    pub nonlinear: TensorDump,
    pub cartan_h: TensorDump,
    pub cartan_v: TensorDump,
    pub riem: TensorDump,
    pub ric: TensorDump,
    pub residuals: ConnectionResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub l: f64,
    pub min_eigenvalue: f64,
    pub r: f64,
    pub riem_max_abs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensors: Option<PointTensors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub path: String,
    pub n: usize,
    pub seed: u64,
    pub model: String,
    pub constraints: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

impl Summary {
    pub fn of(checks: &[CheckReport]) -> Self {
        let mut s = Summary::default();
        for c in checks {
            match c.status {
                CheckStatus::Pass => s.pass += 1,
                CheckStatus::Fail => s.fail += 1,
                CheckStatus::NotApplicable => s.not_applicable += 1,
            }
        }
        s
    }

    /// A run passes only when every requested check passed.
    pub fn all_pass(&self) -> bool {
        self.fail == 0 && self.not_applicable == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    pub summary: Summary,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, tolerances: Tolerances) -> Self {
        Report {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            tolerances,
            metric: None,
            scene: None,
            points: Vec::new(),
            checks: Vec::new(),
            classification: None,
            summary: Summary::default(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Every check's status recomputed from its stored measures agrees with
    /// the stored status.
    pub fn decisions_consistent(&self) -> bool {
        self.checks.iter().all(|c| c.recompute_status() == c.status) && Summary::of(&self.checks) == self.summary
    }
}

pub fn write_report(report: &Report, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, report.to_json())
}
