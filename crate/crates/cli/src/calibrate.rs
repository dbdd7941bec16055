//! Monte Carlo calibration of the two-sample mean tests under the null.
//!
//! Each replicate draws two independent samples from one simulator spec,
//! runs the requested mean test(s), and records the statistics. The report
//! gives the empirical rejection rate at level alpha and the
//! Kolmogorov-Smirnov distance of the statistics against the chi-squared
//! reference with 2k-4 degrees of freedom.
//!
//! Replicates run in parallel; replicate r always uses streams 2r and 2r+1
//! of the master seed and results are reduced in replicate order, so the
//! output is independent of scheduling.

use rayon::prelude::*;
use serde::Serialize;
use shapestat_core::intrinsic::{self, KarcherConfig};
use shapestat_core::{extrinsic, statdist};

use crate::config::AnalysisConfig;
use crate::error::CliError;
use crate::sim::{simulate_sample_stream, SimSpec};

/// Calibration summary for one test statistic.
#[derive(Debug, Clone, Serialize)]
pub struct MethodCalibration {
    /// Statistics in replicate order.
    pub statistics: Vec<f64>,
    /// Fraction of replicates with p-value below alpha.
    pub rejection_rate: f64,
    /// Kolmogorov-Smirnov distance against the chi-squared reference.
    pub ks_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationReport {
    pub replicates: usize,
    pub df: usize,
    pub alpha: f64,
    pub n: usize,
    pub m: usize,
    pub noise_sd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrinsic: Option<MethodCalibration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intrinsic: Option<MethodCalibration>,
}

fn summarize(statistics: Vec<f64>, df: usize, alpha: f64) -> Result<MethodCalibration, CliError> {
    let replicates = statistics.len() as f64;
    let mut rejections = 0usize;
    for &t in &statistics {
        if statdist::chi2_sf(t, df).map_err(CliError::from)? < alpha {
            rejections += 1;
        }
    }
    let mut sorted = statistics.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ks = 0.0f64;
    for (i, &t) in sorted.iter().enumerate() {
        let cdf = 1.0 - statdist::chi2_sf(t, df).map_err(CliError::from)?;
        let above = (i + 1) as f64 / replicates - cdf;
        let below = cdf - i as f64 / replicates;
        ks = ks.max(above.max(below));
    }
    Ok(MethodCalibration {
        statistics,
        rejection_rate: rejections as f64 / replicates,
        ks_distance: ks,
    })
}

/// Runs `config.replicates` null replicates of the mean test(s) selected by
/// `config.method`, with samples of size `spec.n` and `m` drawn from the same
/// spec. Deterministic for a fixed seed.
pub fn calibrate(spec: &SimSpec, m: usize, config: &AnalysisConfig) -> Result<CalibrationReport, CliError> {
    config.validate()?;
    let k = spec.template.k();
    let df = 2 * k - 4;
    let spec_b = SimSpec { template: spec.template.clone(), noise_sd: spec.noise_sd, n: m };
    let karcher: KarcherConfig = config.karcher;

    let per_replicate = |r: usize| -> Result<(Option<f64>, Option<f64>), CliError> {
        let a = simulate_sample_stream(spec, config.seed, 2 * r as u64);
        let b = simulate_sample_stream(&spec_b, config.seed, 2 * r as u64 + 1);
        let ext = if config.method.runs_extrinsic() {
            Some(extrinsic::extrinsic_mean_test(&a, &b, config.alpha)?.statistic)
        } else {
            None
        };
        let int = if config.method.runs_intrinsic() {
            Some(
                intrinsic::intrinsic_mean_test(&a, &b, config.alpha, &karcher, config.fd_step)?
                    .report
                    .statistic,
            )
        } else {
            None
        };
        Ok((ext, int))
    };

    let results: Result<Vec<_>, CliError> =
        (0..config.replicates).into_par_iter().map(per_replicate).collect();
    let results = results?;

    let collect_side = |side: fn(&(Option<f64>, Option<f64>)) -> Option<f64>| -> Vec<f64> {
        results.iter().filter_map(side).collect()
    };
    let extrinsic_stats = collect_side(|r| r.0);
    let intrinsic_stats = collect_side(|r| r.1);

    Ok(CalibrationReport {
        replicates: config.replicates,
        df,
        alpha: config.alpha,
        n: spec.n,
        m,
        noise_sd: spec.noise_sd,
        extrinsic: if extrinsic_stats.is_empty() {
            None
        } else {
            Some(summarize(extrinsic_stats, df, config.alpha)?)
        },
        intrinsic: if intrinsic_stats.is_empty() {
            None
        } else {
            Some(summarize(intrinsic_stats, df, config.alpha)?)
        },
    })
}
