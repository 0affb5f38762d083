use coalition_core::dataset::{generate_synthetic, GeneratorSpec};
use coalition_core::features::{
    build_feature_matrix, default_filter_map, extract_values, magnitude_entropy, Catalog, DegenerateEntropy,
    ExtractionConfig, FeatureDescriptor, Statistic,
};
use coalition_core::wavelet::{BoundaryMode, Channel};
use proptest::prelude::*;

const SCALE_INVARIANT: [Statistic; 4] = [
    Statistic::Skewness,
    Statistic::Kurtosis,
    Statistic::Entropy,
    Statistic::ZeroCrossingRate,
];
const SCALE_EQUIVARIANT: [Statistic; 6] = [
    Statistic::Mean,
    Statistic::Std,
    Statistic::Min,
    Statistic::Max,
    Statistic::Median,
    Statistic::Rms,
];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 8..80)
}

proptest! {
    #[test]
    fn shape_statistics_ignore_positive_scale(x in coeffs(), exp in -6i32..6) {
        // Power-of-two factors scale every value exactly, so histogram bin
        // membership cannot move.
        let c = 2f64.powi(exp);
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let a = extract_values(&x, &SCALE_INVARIANT).unwrap();
        let b = extract_values(&scaled, &SCALE_INVARIANT).unwrap();
        for (stat, (u, v)) in SCALE_INVARIANT.iter().zip(a.iter().zip(&b)) {
            prop_assert!(close(*u, *v, 1e-9), "{stat}: {u} vs {v}");
        }
    }

    #[test]
    fn location_scale_statistics_follow_scale(x in coeffs(), c in 0.01f64..100.0) {
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let a = extract_values(&x, &SCALE_EQUIVARIANT).unwrap();
        let b = extract_values(&scaled, &SCALE_EQUIVARIANT).unwrap();
        for (stat, (u, v)) in SCALE_EQUIVARIANT.iter().zip(a.iter().zip(&b)) {
            prop_assert!(close(u * c, *v, 1e-9), "{stat}: {u}*{c} vs {v}");
        }
    }

    #[test]
    fn moments_match_two_pass_formulas(x in coeffs()) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let got = extract_values(
            &x,
            &[Statistic::Mean, Statistic::Std, Statistic::Skewness, Statistic::Kurtosis, Statistic::Rms],
        ).unwrap();
        prop_assert!(close(got[0], mean, 1e-10));
        prop_assert!(close(got[1], m2.sqrt(), 1e-10));
        prop_assert!(close(got[2], m3 / m2.powf(1.5), 1e-8));
        prop_assert!(close(got[3], m4 / (m2 * m2) - 3.0, 1e-8));
        prop_assert!(close(got[4], rms, 1e-10));
    }

    #[test]
    fn entropy_is_bounded_by_bin_count(x in coeffs()) {
        let h = magnitude_entropy(&x, 16, DegenerateEntropy::SingleBin);
        prop_assert!((0.0..=4.0 + 1e-12).contains(&h));
    }
}

#[test]
fn order_statistics_and_crossings_on_known_vector() {
    let x = [3.0, -1.0, 4.0, -1.5, 5.0, -9.0, 2.0, 6.0];
    let got = extract_values(
        &x,
        &[
            Statistic::Min,
            Statistic::Max,
            Statistic::Median,
            Statistic::ZeroCrossingRate,
            Statistic::P25,
            Statistic::Range,
        ],
    )
    .unwrap();
    // Sorted: -9 -1.5 -1 2 3 4 5 6. Median (2+3)/2; p25 at rank 1.75 -> -1.5 + 0.75*0.5.
    assert_eq!(got[0], -9.0);
    assert_eq!(got[1], 6.0);
    assert_eq!(got[2], 2.5);
    // Sign changes: 3|-1|4|-1.5|5|-9|2 -> 6 of 7 adjacent pairs.
    assert!((got[3] - 6.0 / 7.0).abs() < 1e-15);
    assert!((got[4] - (-1.125)).abs() < 1e-12);
    assert_eq!(got[5], 15.0);
}

#[test]
fn entropy_of_uniform_magnitudes_is_log2_of_bins() {
    // Magnitudes 0..=15 spread over [0, 15]: bins of width 15/16, one value each.
    let x: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { i as f64 } else { -(i as f64) }).collect();
    let h = magnitude_entropy(&x, 16, DegenerateEntropy::SingleBin);
    assert!((h - 4.0).abs() < 1e-12, "{h}");
    assert_eq!(magnitude_entropy(&[2.0, -2.0, 2.0], 16, DegenerateEntropy::SingleBin), 0.0);
}

#[test]
fn constant_band_has_zero_shape_statistics() {
    let got = extract_values(&[1.5; 12], &SCALE_INVARIANT).unwrap();
    assert_eq!(got, vec![0.0; 4]);
}

fn matrix_width(catalog: Catalog) -> (usize, Vec<String>) {
    let channels = vec![Channel::Ecg, Channel::Pleth, Channel::Abp];
    let spec = GeneratorSpec::null(6, channels.clone(), 256, 6);
    let records = generate_synthetic(&spec, 1).unwrap();
    let config = ExtractionConfig {
        filters: default_filter_map(&channels).unwrap(),
        depth: 6,
        catalog,
        boundary: BoundaryMode::Periodic,
    };
    let m = build_feature_matrix(&records, &config).unwrap();
    assert_eq!(m.n_rows(), 6);
    (m.n_features(), m.names().to_vec())
}

#[test]
fn three_channels_six_levels_give_180_or_360_columns() {
    let (width, names) = matrix_width(Catalog::Default);
    assert_eq!(width, 180);
    let unique: std::collections::BTreeSet<_> = names.iter().collect();
    assert_eq!(unique.len(), 180);
    for name in &names {
        let d: FeatureDescriptor = name.parse().unwrap();
        assert!((1..=6).contains(&d.level));
        assert_eq!(&d.to_string(), name);
    }
    assert_eq!(matrix_width(Catalog::Extended).0, 360);
}

#[test]
fn rejects_empty_and_non_finite() {
    assert!(extract_values(&[], &[Statistic::Mean]).is_err());
    assert!(extract_values(&[1.0, f64::INFINITY], &[Statistic::Mean]).is_err());
}
