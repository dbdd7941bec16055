//! Statistical consistency checks that need the simulator: variation and
//! mean estimates concentrate as samples grow, the Karcher mean tracks the
//! extrinsic mean on concentrated data, and the simulator obeys the law of
//! large numbers.

use shapestat::sim::{simulate_sample_stream, SimSpec};
use shapestat_core::frechet::{self, MetricKind};
use shapestat_core::intrinsic::{self, KarcherConfig};
use shapestat_core::{extrinsic, KAd, Shape};

fn pentagon() -> KAd {
    let points: Vec<(f64, f64)> = (0..5)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
            (angle.cos(), angle.sin())
        })
        .collect();
    KAd::from_xy(&points).unwrap()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

fn extrinsic_variation_of(sample: &[Shape]) -> f64 {
    let (_, eig) = extrinsic::extrinsic_mean(sample).unwrap();
    extrinsic::extrinsic_variation(&eig)
}

#[test]
fn sample_variation_concentrates_as_n_doubles() {
    // |V_n - V_2n| should shrink in median as n doubles through
    // 25, 50, 100, 200 (strong consistency of the variation estimator).
    let template = pentagon();
    let replicates = 20;
    let sizes = [25usize, 50, 100, 200];
    let mut medians = Vec::new();
    for window in sizes.windows(2) {
        let mut gaps = Vec::new();
        for rep in 0..replicates {
            let spec_n = SimSpec::new(template.clone(), 0.05, window[0]).unwrap();
            let spec_2n = SimSpec::new(template.clone(), 0.05, window[1]).unwrap();
            let v_n = extrinsic_variation_of(&simulate_sample_stream(&spec_n, 1000 + rep, 0));
            let v_2n = extrinsic_variation_of(&simulate_sample_stream(&spec_2n, 1000 + rep, 1));
            gaps.push((v_n - v_2n).abs());
        }
        medians.push(median(&mut gaps));
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not decreasing: {medians:?}"
    );
}

#[test]
fn extrinsic_mean_concentrates_on_the_template() {
    let template = pentagon();
    let truth = Shape::from_kad(&template).unwrap();
    let replicates = 20;
    let mut medians = Vec::new();
    for n in [25usize, 50, 100, 200] {
        let spec = SimSpec::new(template.clone(), 0.05, n).unwrap();
        let mut dists = Vec::new();
        for rep in 0..replicates {
            let sample = simulate_sample_stream(&spec, 2000 + rep, 0);
            let (mean, _) = extrinsic::extrinsic_mean(&sample).unwrap();
            dists.push(mean.procrustes_distance_sq(&truth).sqrt());
        }
        medians.push(median(&mut dists));
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2] && medians[2] > medians[3],
        "medians not decreasing: {medians:?}"
    );
}

#[test]
fn karcher_mean_stays_near_extrinsic_mean_on_concentrated_data() {
    let template = pentagon();
    let spec = SimSpec::new(template, 0.02, 100).unwrap();
    for seed in 0..5 {
        let sample = simulate_sample_stream(&spec, 3000 + seed, 0);
        let radius = {
            let truth = &sample[0];
            sample.iter().map(|s| truth.geodesic_distance(s)).fold(0.0f64, f64::max)
        };
        assert!(radius < std::f64::consts::PI / 8.0, "sample not concentrated: {radius}");

        let (ext_mean, eig) = extrinsic::extrinsic_mean(&sample).unwrap();
        let out = intrinsic::karcher_mean(&sample, &ext_mean, &KarcherConfig::default()).unwrap();
        assert!(out.support_ok);
        let variation = extrinsic::extrinsic_variation(&eig);
        let gap = out.mean.procrustes_distance_sq(&ext_mean).sqrt();
        assert!(gap <= 10.0 * variation, "seed {seed}: gap {gap} vs variation {variation}");
    }
}

#[test]
fn intrinsic_variation_concentrates_too() {
    let template = pentagon();
    let mut medians = Vec::new();
    for n in [25usize, 100] {
        let spec = SimSpec::new(template.clone(), 0.05, n).unwrap();
        let mut gaps = Vec::new();
        for rep in 0..10 {
            let sample = simulate_sample_stream(&spec, 4000 + rep, 0);
            let (init, _) = extrinsic::extrinsic_mean(&sample).unwrap();
            let fit = intrinsic::karcher_mean(&sample, &init, &KarcherConfig::default()).unwrap();
            let summary =
                frechet::variation_summary(&sample, &fit.mean, MetricKind::Intrinsic).unwrap();
            gaps.push(summary.variation);
        }
        let spread = {
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            gaps.iter().map(|v| (v - mean).abs()).fold(0.0f64, f64::max)
        };
        medians.push(spread);
    }
    assert!(medians[1] < medians[0], "spreads not decreasing: {medians:?}");
}

#[test]
fn confidence_region_volume_shrinks_with_n() {
    let template = pentagon();
    let karcher = KarcherConfig::default();
    let volume_at = |n: usize, rep: u64| {
        let spec = SimSpec::new(template.clone(), 0.02, n).unwrap();
        let sample = simulate_sample_stream(&spec, 5000 + rep, 0);
        intrinsic::intrinsic_confidence_region(&sample, 0.05, &karcher, 1e-4)
            .unwrap()
            .volume()
    };
    let mut small: Vec<f64> = (0..20).map(|rep| volume_at(50, rep)).collect();
    let mut large: Vec<f64> = (0..20).map(|rep| volume_at(200, rep)).collect();
    let med_small = median(&mut small);
    let med_large = median(&mut large);
    assert!(
        med_large < med_small,
        "median region volume did not shrink: n=50 gives {med_small:.3e}, n=200 gives {med_large:.3e}"
    );
}

#[test]
fn variation_test_has_power_against_wider_noise() {
    // Samples of 200 with noise 0.01 vs 0.02 should be separated at
    // alpha = 0.05 in at least 90% of 100 seeded runs.
    let template = pentagon();
    let tight = SimSpec::new(template.clone(), 0.01, 200).unwrap();
    let wide = SimSpec::new(template, 0.02, 200).unwrap();
    let mut rejections = 0;
    for run in 0..100u64 {
        let a = simulate_sample_stream(&tight, 6000 + run, 0);
        let b = simulate_sample_stream(&wide, 6000 + run, 1);
        let report = extrinsic::extrinsic_variation_test(&a, &b, 0.05).unwrap();
        assert!(report.statistic < 0.0, "tighter sample should have smaller variation");
        if report.reject {
            rejections += 1;
        }
    }
    assert!(rejections >= 90, "only {rejections}/100 runs rejected equal variations");
}

#[test]
fn simulated_variation_stabilizes_at_large_n() {
    // Law of large numbers: two independent 10^4-point samples agree on the
    // extrinsic variation within 10%.
    let template = pentagon();
    let spec = SimSpec::new(template, 0.01, 10_000).unwrap();
    let v1 = extrinsic_variation_of(&simulate_sample_stream(&spec, 71, 0));
    let v2 = extrinsic_variation_of(&simulate_sample_stream(&spec, 72, 0));
    assert!(v1 > 0.0 && v2 > 0.0);
    assert!((v1 - v2).abs() / v1.max(v2) < 0.10, "v1={v1} v2={v2}");
}
