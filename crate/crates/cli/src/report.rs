//! JSON report documents. Every command echoes its full effective
//! configuration (defaults included); field order is fixed by the struct
//! declarations, so output for fixed inputs and seed is byte-identical.

use serde::Serialize;
use shapestat_core::frechet::{ReferenceDistribution, TestReport};
use shapestat_core::{Preshape, VariationSummary};

use crate::calibrate::CalibrationReport;
use crate::config::AnalysisConfig;
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Document {
    pub command: String,
    pub config: ConfigEcho,
    pub samples: Vec<SampleBlock>,
    pub tests: Vec<TestBlock>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationReport>,
}

impl Document {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Document {
            command: command.to_string(),
            config,
            samples: Vec::new(),
            tests: Vec::new(),
            warnings: Vec::new(),
            calibration: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// The full effective configuration, defaults included.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub method: String,
    pub format: String,
    pub karcher_step: f64,
    pub karcher_tol: f64,
    pub karcher_max_iter: usize,
    pub fd_step: f64,
    pub seed: u64,
    pub replicates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
}

impl ConfigEcho {
    pub fn new(config: &AnalysisConfig, format: &str) -> Self {
        ConfigEcho {
            alpha: config.alpha,
            method: config.method.as_str().to_string(),
            format: format.to_string(),
            karcher_step: config.karcher.step,
            karcher_tol: config.karcher.tol,
            karcher_max_iter: config.karcher.max_iter,
            fd_step: config.fd_step,
            seed: config.seed,
            replicates: config.replicates,
            bootstrap: config.bootstrap,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SampleBlock {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub variation: f64,
    /// Mean preshape as [re, im] pairs.
    pub mean_preshape: Vec<[f64; 2]>,
}

impl SampleBlock {
    pub fn new(label: &str, k: usize, summary: &VariationSummary, mean: &Preshape) -> Self {
        SampleBlock {
            label: label.to_string(),
            n: summary.n,
            k,
            variation: summary.variation,
            mean_preshape: mean.coords().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TestBlock {
    pub name: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub df: Option<usize>,
    pub p_value: f64,
    pub reject: bool,
}

impl TestBlock {
    pub fn from_report(name: &str, report: &TestReport) -> Self {
        let df = match report.distribution {
            ReferenceDistribution::ChiSquared { df } => Some(df),
            ReferenceDistribution::StandardNormal => None,
        };
        TestBlock {
            name: name.to_string(),
            statistic: report.statistic,
            df,
            p_value: report.p_value,
            reject: report.reject,
        }
    }
}

/// Structured error rendering for nonzero exits.
#[derive(Debug, Serialize)]
pub struct ErrorDocument {
    pub command: String,
    pub error: ErrorBlock,
}

#[derive(Debug, Serialize)]
pub struct ErrorBlock {
    pub kind: String,
    pub message: String,
}

impl ErrorDocument {
    pub fn new(command: &str, error: &CliError) -> Self {
        ErrorDocument {
            command: command.to_string(),
            error: ErrorBlock { kind: error.kind().to_string(), message: error.to_string() },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error serialization cannot fail")
    }
}
