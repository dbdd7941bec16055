//! Effective analysis configuration shared by every subcommand and echoed in
//! full into each JSON report.

use shapestat_core::intrinsic::KarcherConfig;

use crate::error::CliError;

/// Which metric(s) an analysis runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Extrinsic,
    Intrinsic,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Extrinsic => "extrinsic",
            Method::Intrinsic => "intrinsic",
            Method::Both => "both",
        }
    }

    pub fn runs_extrinsic(self) -> bool {
        matches!(self, Method::Extrinsic | Method::Both)
    }

    pub fn runs_intrinsic(self) -> bool {
        matches!(self, Method::Intrinsic | Method::Both)
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub method: Method,
    pub karcher: KarcherConfig,
    pub fd_step: f64,
    pub seed: u64,
    /// Replicate count for calibration and bootstrap runs.
    pub replicates: usize,
    /// When set, variation tests replace the asymptotic p-value with a
    /// seeded nonparametric bootstrap p-value over this many resamples.
    pub bootstrap: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha: 0.05,
            method: Method::Extrinsic,
            karcher: KarcherConfig::default(),
            fd_step: shapestat_core::intrinsic::DEFAULT_FD_STEP,
            seed: 0,
            replicates: 500,
            bootstrap: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.karcher.tol > 0.0) {
            return Err(CliError::Usage(format!(
                "karcher tolerance must be positive, got {}",
                self.karcher.tol
            )));
        }
        if !(self.fd_step > 0.0) {
            return Err(CliError::Usage(format!("fd step must be positive, got {}", self.fd_step)));
        }
        if self.replicates == 0 {
            return Err(CliError::Usage("replicates must be at least 1".into()));
        }
        if self.bootstrap == Some(0) {
            return Err(CliError::Usage("bootstrap replicates must be at least 1".into()));
        }
        Ok(())
    }
}
