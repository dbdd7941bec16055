//! Frechet functions, variation summaries, and the distribution-free
//! two-sample variation test.
//!
//! The Frechet function of a sample under a squared distance rho^2 is
//! `F_n(p) = (1/n) sum_j rho^2(X_j, p)`; its minimizer is the sample Frechet
//! mean and its minimum the sample Frechet variation. Mean computation is
//! structure-specific (top eigenvector for the extrinsic metric, Karcher
//! iteration for the intrinsic one) and lives in those modules; this module
//! provides everything that is generic in the metric.

use crate::error::{Result, ShapeError};
use crate::shape::Shape;
use crate::statdist;

/// Which of the two distances on the shape space an analysis uses. One
/// analysis should use a single metric throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Full Procrustes distance from the Veronese-Whitney embedding.
    Extrinsic,
    /// Geodesic (Fubini-Study) distance.
    Intrinsic,
}

impl MetricKind {
    /// Squared distance between two shapes under this metric.
    pub fn distance_sq(self, a: &Shape, b: &Shape) -> f64 {
        match self {
            MetricKind::Extrinsic => a.procrustes_distance_sq(b),
            MetricKind::Intrinsic => {
                let d = a.geodesic_distance(b);
                d * d
            }
        }
    }
}

/// Sample size, Frechet variation, and the sample variance of the squared
/// distances to the mean — the ingredients of the variation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationSummary {
    pub n: usize,
    /// `V_n`: average squared distance to the Frechet mean.
    pub variation: f64,
    /// `s^2 = (1/n) sum_j (rho^2(X_j, mean) - V_n)^2`, with the 1/n divisor.
    pub s_sq: f64,
}

/// Reference distribution of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceDistribution {
    ChiSquared { df: usize },
    StandardNormal,
}

/// Outcome of a two-sample test: statistic, reference distribution, p-value,
/// and the decision at the requested level. `reject` holds exactly when
/// `p_value < alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    pub distribution: ReferenceDistribution,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

impl TestReport {
    /// Computes the p-value from the statistic and distribution, and the
    /// decision from the p-value. Chi-squared statistics are one-sided
    /// (upper tail); normal statistics are two-sided.
    pub fn new(statistic: f64, distribution: ReferenceDistribution, alpha: f64) -> Result<Self> {
        let p_value = match distribution {
            ReferenceDistribution::ChiSquared { df } => statdist::chi2_sf(statistic, df)?,
            ReferenceDistribution::StandardNormal => statdist::normal_two_sided_p(statistic),
        };
        Ok(TestReport { statistic, distribution, p_value, alpha, reject: p_value < alpha })
    }
}

/// `F_n(p) = (1/n) sum_j rho^2(X_j, p)`: the average squared distance from
/// `p` to the sample under the chosen metric.
pub fn frechet_function(p: &Shape, sample: &[Shape], metric: MetricKind) -> Result<f64> {
    if sample.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let total: f64 = sample.iter().map(|x| metric.distance_sq(x, p)).sum();
    Ok(total / sample.len() as f64)
}

/// Variation and squared-distance variance of a sample around its Frechet
/// mean. The mean must be the sample Frechet mean under `metric`; it is
/// caller-supplied because computing it is structure-specific.
pub fn variation_summary(sample: &[Shape], mean: &Shape, metric: MetricKind) -> Result<VariationSummary> {
    if sample.is_empty() {
        return Err(ShapeError::EmptySample);
    }
    let n = sample.len();
    let dists_sq: Vec<f64> = sample.iter().map(|x| metric.distance_sq(x, mean)).collect();
    let variation = dists_sq.iter().sum::<f64>() / n as f64;
    let s_sq = dists_sq.iter().map(|d| (d - variation).powi(2)).sum::<f64>() / n as f64;
    Ok(VariationSummary { n, variation, s_sq })
}

/// Two-sample test of equal Frechet variations:
/// `T = (V_A - V_B) / sqrt(s_A^2/n + s_B^2/m)`, asymptotically standard
/// normal under the null, with a two-sided p-value.
pub fn variation_test(a: &VariationSummary, b: &VariationSummary, alpha: f64) -> Result<TestReport> {
    if a.n < 2 {
        return Err(ShapeError::SampleTooSmall { needed: 2, got: a.n });
    }
    if b.n < 2 {
        return Err(ShapeError::SampleTooSmall { needed: 2, got: b.n });
    }
    let pooled = a.s_sq / a.n as f64 + b.s_sq / b.n as f64;
    if pooled == 0.0 {
        return Err(ShapeError::DegenerateVariance);
    }
    let statistic = (a.variation - b.variation) / pooled.sqrt();
    TestReport::new(statistic, ReferenceDistribution::StandardNormal, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::KAd;

    fn shape(points: &[(f64, f64)]) -> Shape {
        Shape::from_kad(&KAd::from_xy(points).unwrap()).unwrap()
    }

    fn sample_of_three() -> Vec<Shape> {
        vec![
            shape(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
            shape(&[(0.0, 0.1), (1.1, 0.0), (0.2, 0.9)]),
            shape(&[(0.1, -0.1), (0.9, 0.2), (-0.1, 1.1)]),
        ]
    }

    #[test]
    fn frechet_function_point_mass_is_zero() {
        let p = shape(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let sample = vec![p.clone()];
        for metric in [MetricKind::Extrinsic, MetricKind::Intrinsic] {
            assert!(frechet_function(&p, &sample, metric).unwrap() < 1e-14);
        }
    }

    #[test]
    fn frechet_function_two_points_at_one_of_them() {
        let a = shape(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let b = shape(&[(0.0, 0.0), (1.0, 0.3), (0.4, 0.8)]);
        let sample = vec![a.clone(), b.clone()];
        let got = frechet_function(&a, &sample, MetricKind::Extrinsic).unwrap();
        assert!((got - a.procrustes_distance_sq(&b) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn frechet_function_matches_direct_summation_and_permutation() {
        let sample = sample_of_three();
        let p = shape(&[(0.05, 0.0), (1.0, 0.1), (0.1, 1.0)]);
        for metric in [MetricKind::Extrinsic, MetricKind::Intrinsic] {
            let mut direct = 0.0;
            for x in &sample {
                direct += metric.distance_sq(x, &p);
            }
            direct /= sample.len() as f64;
            let got = frechet_function(&p, &sample, metric).unwrap();
            assert!((got - direct).abs() < 1e-12);

            let mut permuted = sample.clone();
            permuted.reverse();
            let got_perm = frechet_function(&p, &permuted, metric).unwrap();
            assert_eq!(got, got_perm);
        }
    }

    #[test]
    fn empty_sample_is_rejected() {
        let p = shape(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(
            frechet_function(&p, &[], MetricKind::Extrinsic).unwrap_err(),
            ShapeError::EmptySample
        );
        assert_eq!(
            variation_summary(&[], &p, MetricKind::Extrinsic).unwrap_err(),
            ShapeError::EmptySample
        );
    }

    #[test]
    fn variation_summary_point_mass() {
        let p = shape(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let sample = vec![p.clone(), p.clone(), p.clone()];
        let s = variation_summary(&sample, &p, MetricKind::Intrinsic).unwrap();
        assert!(s.variation < 1e-14);
        assert!(s.s_sq < 1e-28);
    }

    #[test]
    fn variation_summary_equidistant_pair_has_zero_s_sq() {
        // The two sample distances to the midpoint shape are equal, so the
        // variance of the squared distances vanishes.
        let a = shape(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let b = shape(&[(0.0, 0.0), (1.0, 0.0), (0.1, 1.05)]);
        let mid = crate::intrinsic::exp_map(
            &crate::intrinsic::log_map(&a, &b).unwrap().scaled(0.5),
        )
        .unwrap();
        let s = variation_summary(&[a, b], &mid, MetricKind::Intrinsic).unwrap();
        assert!(s.s_sq < 1e-20, "s_sq = {}", s.s_sq);
    }

    #[test]
    fn variation_summary_matches_brute_force() {
        let sample = sample_of_three();
        let mean = shape(&[(0.03, 0.0), (1.0, 0.07), (0.0, 1.0)]);
        let s = variation_summary(&sample, &mean, MetricKind::Extrinsic).unwrap();
        let d: Vec<f64> = sample.iter().map(|x| x.procrustes_distance_sq(&mean)).collect();
        let v = d.iter().sum::<f64>() / 3.0;
        let var = d.iter().map(|x| (x - v).powi(2)).sum::<f64>() / 3.0;
        assert!((s.variation - v).abs() < 1e-15);
        assert!((s.s_sq - var).abs() < 1e-15);
        assert_eq!(s.n, 3);
    }

    #[test]
    fn variation_test_identical_summaries() {
        let s = VariationSummary { n: 50, variation: 0.3, s_sq: 0.02 };
        let report = variation_test(&s, &s, 0.05).unwrap();
        assert_eq!(report.statistic, 0.0);
        assert_eq!(report.p_value, 1.0);
        assert!(!report.reject);
    }

    #[test]
    fn variation_test_direct_evaluation() {
        let a = VariationSummary { n: 100, variation: 2.0, s_sq: 1.0 };
        let b = VariationSummary { n: 100, variation: 1.0, s_sq: 1.0 };
        let report = variation_test(&a, &b, 0.05).unwrap();
        assert!((report.statistic - 1.0 / 0.02f64.sqrt()).abs() < 1e-12);
        assert!((report.statistic - 7.0711).abs() < 1e-3);
        assert!(report.reject);
    }

    #[test]
    fn variation_test_published_p_value() {
        let p = statdist::normal_two_sided_p(0.9461);
        assert!((p - 0.3441).abs() < 0.0005);
    }

    #[test]
    fn variation_test_antisymmetry() {
        let a = VariationSummary { n: 40, variation: 0.8, s_sq: 0.5 };
        let b = VariationSummary { n: 60, variation: 0.5, s_sq: 0.7 };
        let ab = variation_test(&a, &b, 0.05).unwrap();
        let ba = variation_test(&b, &a, 0.05).unwrap();
        assert_eq!(ab.statistic, -ba.statistic);
        assert_eq!(ab.p_value, ba.p_value);
    }

    #[test]
    fn variation_test_degenerate_variance() {
        let a = VariationSummary { n: 10, variation: 0.1, s_sq: 0.0 };
        let b = VariationSummary { n: 10, variation: 0.1, s_sq: 0.0 };
        assert_eq!(variation_test(&a, &b, 0.05).unwrap_err(), ShapeError::DegenerateVariance);
    }

    #[test]
    fn variation_test_small_samples() {
        let a = VariationSummary { n: 1, variation: 0.1, s_sq: 0.1 };
        let b = VariationSummary { n: 10, variation: 0.1, s_sq: 0.1 };
        assert_eq!(
            variation_test(&a, &b, 0.05).unwrap_err(),
            ShapeError::SampleTooSmall { needed: 2, got: 1 }
        );
    }
}
