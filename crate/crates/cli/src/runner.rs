//! Test drivers: parse inputs are turned into per-sample summaries and
//! two-sample test reports, assembled into JSON documents.

use rand::Rng;
use shapestat_core::frechet::{self, MetricKind, VariationSummary};
use shapestat_core::intrinsic::{self, KarcherOutcome};
use shapestat_core::{extrinsic, Shape};

use crate::config::AnalysisConfig;
use crate::error::CliError;
use crate::landmarks::LandmarkFile;
use crate::report::{ConfigEcho, Document, SampleBlock, TestBlock};
use crate::sim::stream_rng;

fn check_same_k(a: &LandmarkFile, b: &LandmarkFile) -> Result<(), CliError> {
    if a.k != b.k {
        return Err(CliError::Usage(format!(
            "samples '{}' and '{}' have different landmark counts ({} vs {})",
            a.label, b.label, a.k, b.k
        )));
    }
    Ok(())
}

/// Karcher mean of a sample, initialized at its extrinsic mean.
fn karcher_fit(sample: &[Shape], config: &AnalysisConfig) -> Result<KarcherOutcome, CliError> {
    let (init, _) = extrinsic::extrinsic_mean(sample)?;
    Ok(intrinsic::karcher_mean(sample, &init, &config.karcher)?)
}

fn support_warning(label: &str, outcome: &KarcherOutcome, warnings: &mut Vec<String>) {
    if !outcome.support_ok {
        warnings.push(format!(
            "sample '{}': support radius {:.4} exceeds the uniqueness bound pi/4; \
             the Karcher mean may be a local minimum only",
            label, outcome.support_radius
        ));
    }
}

fn intrinsic_sample_block(
    file: &LandmarkFile,
    shapes: &[Shape],
    config: &AnalysisConfig,
    warnings: &mut Vec<String>,
) -> Result<SampleBlock, CliError> {
    let fit = karcher_fit(shapes, config)?;
    support_warning(&file.label, &fit, warnings);
    let summary = frechet::variation_summary(shapes, &fit.mean, MetricKind::Intrinsic)?;
    Ok(SampleBlock::new(&file.label, file.k, &summary, fit.mean.rep()))
}

fn extrinsic_sample_block(file: &LandmarkFile, shapes: &[Shape]) -> Result<SampleBlock, CliError> {
    let (mean, summary) = extrinsic::extrinsic_summary(shapes)?;
    Ok(SampleBlock::new(&file.label, file.k, &summary, mean.rep()))
}

/// Per-sample blocks under the metric implied by the method (extrinsic wins
/// when both run; the intrinsic means still feed the intrinsic tests).
fn sample_blocks(
    files: &[(&LandmarkFile, &[Shape])],
    config: &AnalysisConfig,
    warnings: &mut Vec<String>,
) -> Result<Vec<SampleBlock>, CliError> {
    files
        .iter()
        .map(|(file, shapes)| {
            if config.method.runs_extrinsic() {
                extrinsic_sample_block(file, shapes)
            } else {
                intrinsic_sample_block(file, shapes, config, warnings)
            }
        })
        .collect()
}

/// Dispatches the mean test(s) selected by the configuration and assembles
/// the JSON document.
pub fn run_mean_test(
    a: &LandmarkFile,
    b: &LandmarkFile,
    config: &AnalysisConfig,
    format_name: &str,
) -> Result<Document, CliError> {
    config.validate()?;
    check_same_k(a, b)?;
    let shapes_a = a.shapes()?;
    let shapes_b = b.shapes()?;

    let mut doc = Document::new("mean-test", ConfigEcho::new(config, format_name));
    doc.samples =
        sample_blocks(&[(a, &shapes_a), (b, &shapes_b)], config, &mut doc.warnings)?;

    if config.method.runs_extrinsic() {
        let report = extrinsic::extrinsic_mean_test(&shapes_a, &shapes_b, config.alpha)?;
        doc.tests.push(TestBlock::from_report("extrinsic_mean", &report));
    }
    if config.method.runs_intrinsic() {
        let outcome = intrinsic::intrinsic_mean_test(
            &shapes_a,
            &shapes_b,
            config.alpha,
            &config.karcher,
            config.fd_step,
        )?;
        if !outcome.support_ok {
            doc.warnings.push(
                "intrinsic mean test: a Karcher fit violated the pi/4 support bound".into(),
            );
        }
        doc.tests.push(TestBlock::from_report("intrinsic_mean", &outcome.report));
    }
    Ok(doc)
}

/// Variation summaries of both samples under one metric, with the extrinsic
/// variation taken from the eigenvalue identity.
fn variation_summaries(
    shapes_a: &[Shape],
    shapes_b: &[Shape],
    metric: MetricKind,
    config: &AnalysisConfig,
) -> Result<(VariationSummary, VariationSummary), CliError> {
    match metric {
        MetricKind::Extrinsic => {
            let (_, sa) = extrinsic::extrinsic_summary(shapes_a)?;
            let (_, sb) = extrinsic::extrinsic_summary(shapes_b)?;
            Ok((sa, sb))
        }
        MetricKind::Intrinsic => {
            let fit_a = karcher_fit(shapes_a, config)?;
            let fit_b = karcher_fit(shapes_b, config)?;
            Ok((
                frechet::variation_summary(shapes_a, &fit_a.mean, metric)?,
                frechet::variation_summary(shapes_b, &fit_b.mean, metric)?,
            ))
        }
    }
}

/// Nonparametric bootstrap p-value for a variation statistic: resample both
/// samples with replacement, recompute the statistic, and compare the
/// centered resampled statistics against the observed one.
fn bootstrap_p_value(
    shapes_a: &[Shape],
    shapes_b: &[Shape],
    metric: MetricKind,
    observed: f64,
    replicates: usize,
    config: &AnalysisConfig,
) -> Result<f64, CliError> {
    let mut extreme = 0usize;
    for r in 0..replicates {
        let mut rng = stream_rng(config.seed, r as u64);
        let resample = |shapes: &[Shape], rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Shape> {
            (0..shapes.len()).map(|_| shapes[rng.gen_range(0..shapes.len())].clone()).collect()
        };
        let a_star = resample(shapes_a, &mut rng);
        let b_star = resample(shapes_b, &mut rng);
        let (sa, sb) = variation_summaries(&a_star, &b_star, metric, config)?;
        let stat = frechet::variation_test(&sa, &sb, config.alpha)?.statistic;
        if (stat - observed).abs() >= observed.abs() {
            extreme += 1;
        }
    }
    Ok((1 + extreme) as f64 / (replicates + 1) as f64)
}

/// Dispatches the variation test(s) selected by the configuration.
pub fn run_variation_test(
    a: &LandmarkFile,
    b: &LandmarkFile,
    config: &AnalysisConfig,
    format_name: &str,
) -> Result<Document, CliError> {
    config.validate()?;
    check_same_k(a, b)?;
    let shapes_a = a.shapes()?;
    let shapes_b = b.shapes()?;

    let mut doc = Document::new("variation-test", ConfigEcho::new(config, format_name));
    doc.samples =
        sample_blocks(&[(a, &shapes_a), (b, &shapes_b)], config, &mut doc.warnings)?;

    let mut run_metric = |metric: MetricKind, name: &str| -> Result<(), CliError> {
        let (sa, sb) = variation_summaries(&shapes_a, &shapes_b, metric, config)?;
        let mut report = frechet::variation_test(&sa, &sb, config.alpha)?;
        if let Some(replicates) = config.bootstrap {
            let p = bootstrap_p_value(
                &shapes_a,
                &shapes_b,
                metric,
                report.statistic,
                replicates,
                config,
            )?;
            report.p_value = p;
            report.reject = p < config.alpha;
            doc.warnings.push(format!(
                "{name}: p-value from a seeded nonparametric bootstrap ({replicates} resamples)"
            ));
        }
        doc.tests.push(TestBlock::from_report(name, &report));
        Ok(())
    };

    if config.method.runs_extrinsic() {
        run_metric(MetricKind::Extrinsic, "extrinsic_variation")?;
    }
    if config.method.runs_intrinsic() {
        run_metric(MetricKind::Intrinsic, "intrinsic_variation")?;
    }
    Ok(doc)
}

/// Mean and variation of a single sample, no tests.
pub fn run_summary(
    file: &LandmarkFile,
    config: &AnalysisConfig,
    format_name: &str,
) -> Result<Document, CliError> {
    config.validate()?;
    let shapes = file.shapes()?;
    let mut doc = Document::new("summary", ConfigEcho::new(config, format_name));
    if config.method.runs_extrinsic() {
        doc.samples.push(extrinsic_sample_block(file, &shapes)?);
    }
    if config.method.runs_intrinsic() {
        doc.samples.push(intrinsic_sample_block(file, &shapes, config, &mut doc.warnings)?);
    }
    Ok(doc)
}
