use coalition_core::classifier::{cv_accuracy, majority_rate, ClassifierConfig};
use coalition_core::dataset::{
    generate_synthetic, load_records, stratified_kfold, write_records, Component, GeneratorSpec, Label,
};
use coalition_core::features::{build_feature_matrix, default_filter_map, Catalog, ExtractionConfig, FeatureMatrix};
use coalition_core::wavelet::{BoundaryMode, Channel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn features(spec: &GeneratorSpec, seed: u64) -> FeatureMatrix {
    let records = generate_synthetic(spec, seed).unwrap();
    let config = ExtractionConfig {
        filters: default_filter_map(&spec.channels).unwrap(),
        depth: spec.depth,
        catalog: Catalog::Default,
        boundary: BoundaryMode::Periodic,
    };
    build_feature_matrix(&records, &config).unwrap()
}

fn xor_spec(samples: usize) -> GeneratorSpec {
    let mut spec = GeneratorSpec::null(samples, vec![Channel::Ecg], 256, 4);
    spec.coalition = vec![
        Component { channel: Channel::Ecg, level: 2 },
        Component { channel: Channel::Ecg, level: 3 },
    ];
    spec
}

fn as_f64(labels: &[Label]) -> Vec<f64> {
    labels.iter().map(|l| l.index() as f64).collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn stratification_bound_holds_for_random_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for trial in 0..500 {
        let n = rng.random_range(10..200);
        let p = rng.random_range(0.1..0.9);
        let k = rng.random_range(2..=10);
        let labels: Vec<Label> = (0..n).map(|_| Label::from_bool(rng.random_bool(p))).collect();
        let counts = [0, 1].map(|c| labels.iter().filter(|l| l.index() == c).count());
        let plan = match stratified_kfold(&labels, k, trial) {
            Ok(plan) => plan,
            Err(_) => {
                assert!(counts.iter().any(|&c| c < k));
                continue;
            }
        };
        checked += 1;
        let mut sizes = vec![0usize; k];
        for &f in &plan.fold_assignments {
            assert!(f < k);
            sizes[f] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
        for (c, &count) in counts.iter().enumerate() {
            for f in 0..k {
                let in_fold = (0..n)
                    .filter(|&i| plan.fold_assignments[i] == f && labels[i].index() == c)
                    .count();
                assert!(in_fold == count / k || in_fold == count.div_ceil(k), "class {c} fold {f}");
            }
        }
    }
    assert!(checked > 400);
}

#[test]
fn planted_pair_is_marginally_silent_but_jointly_decisive() {
    let m = features(&xor_spec(200), 7);
    let y = m.labels().to_vec();
    let yf = as_f64(&y);
    let a = m.column(m.column_index("ECG_L2_std").unwrap());
    let b = m.column(m.column_index("ECG_L3_std").unwrap());
    for col in [&a, &b] {
        let r = pearson(col, &yf);
        assert!(r.abs() < 0.15, "point-biserial r = {r}");
    }

    // Exhaustive search over threshold pairs at every observed value.
    let mut best = 0usize;
    for &ta in &a {
        for &tb in &b {
            let agree = (0..y.len())
                .filter(|&i| ((a[i] > ta) ^ (b[i] > tb)) == (y[i] == Label::True))
                .count();
            best = best.max(agree).max(y.len() - agree);
        }
    }
    let accuracy = best as f64 / y.len() as f64;
    assert!(accuracy >= 0.95, "best depth-2 rule accuracy {accuracy}");
}

#[test]
fn null_spec_gives_chance_level_classifiers() {
    let spec = GeneratorSpec::null(200, vec![Channel::Ecg, Channel::Abp], 256, 4);
    let m = features(&spec, 21);
    let plan = stratified_kfold(m.labels(), 5, 0).unwrap();
    let majority = majority_rate(m.labels());
    let sigma = (majority * (1.0 - majority) / m.n_rows() as f64).sqrt();
    let std_cols: Vec<usize> = (0..m.n_features()).filter(|&c| m.names()[c].ends_with("_std")).collect();
    for config in [ClassifierConfig::default(), ClassifierConfig::naive_bayes()] {
        let acc = cv_accuracy(&m, &std_cols, &plan, &config).unwrap().accuracy;
        assert!((acc - majority).abs() <= 3.0 * sigma, "{config:?}: {acc} vs {majority} ± {}", 3.0 * sigma);
    }
}

/// Plug-in mutual information in bits between quartile bins of `x` and the label.
fn quartile_mi(x: &[f64], labels: &[Label]) -> f64 {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut joint = [[0f64; 2]; 4];
    for (rank, &i) in order.iter().enumerate() {
        joint[rank * 4 / n][labels[i].index()] += 1.0;
    }
    let total = n as f64;
    let py = [0, 1].map(|c| joint.iter().map(|r| r[c]).sum::<f64>() / total);
    let mut mi = 0.0;
    for row in &joint {
        let px = (row[0] + row[1]) / total;
        for c in 0..2 {
            let p = row[c] / total;
            if p > 0.0 {
                mi += p * (p / (px * py[c])).log2();
            }
        }
    }
    mi
}

#[test]
fn null_features_carry_no_information_on_average() {
    let spec = GeneratorSpec::null(400, vec![Channel::Ecg], 256, 4);
    let mut sums: Option<Vec<f64>> = None;
    let seeds = 50;
    for seed in 0..seeds {
        let m = features(&spec, seed);
        let mis: Vec<f64> = (0..m.n_features()).map(|c| quartile_mi(&m.column(c), m.labels())).collect();
        match sums.as_mut() {
            None => sums = Some(mis),
            Some(s) => s.iter_mut().zip(&mis).for_each(|(a, b)| *a += b),
        }
    }
    for (c, total) in sums.unwrap().iter().enumerate() {
        let mean = total / seeds as f64;
        assert!(mean < 0.02, "feature {c}: mean MI {mean}");
    }
}

#[test]
fn written_records_reload_bit_exactly() {
    let spec = GeneratorSpec::null(4, vec![Channel::Ecg, Channel::Pleth], 128, 3);
    let records = generate_synthetic(&spec, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_records(dir.path(), &spec.channels, spec.sample_rate, &records).unwrap();
    let loaded = load_records(dir.path()).unwrap();
    assert_eq!(loaded.records, records);
    assert_eq!(loaded.excluded_unknown, 0);
}

#[test]
fn generator_is_reproducible_and_validates() {
    let spec = xor_spec(20);
    assert_eq!(generate_synthetic(&spec, 3).unwrap(), generate_synthetic(&spec, 3).unwrap());
    assert_ne!(generate_synthetic(&spec, 3).unwrap(), generate_synthetic(&spec, 4).unwrap());

    let mut bad = xor_spec(20);
    bad.coalition = (1..=5).map(|level| Component { channel: Channel::Ecg, level }).collect();
    assert!(generate_synthetic(&bad, 0).is_err());
    let mut short = xor_spec(20);
    short.signal_length = 8;
    assert!(generate_synthetic(&short, 0).is_err());
}
