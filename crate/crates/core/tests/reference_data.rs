use softsensor::dataset::{filter_outliers, flag_outliers_zscore, ColumnStats, DEFAULT_ZSCORE_THRESHOLD, N_FEATURES};
use softsensor::evaluation::pearson;
use softsensor::synth::{generate, GeneratorConfig};

#[test]
fn reference_dataset_shape_and_correlation() {
    let (data, manifest) = generate(&GeneratorConfig::with_seed(42)).unwrap();
    assert_eq!(data.len(), 14_252);
    assert_eq!(data.n_outliers(), 23);
    assert_eq!(manifest.outlier_indices.len(), 23);

    let r = pearson(&data.column(0), &data.labels().unwrap()).unwrap();
    assert!((-0.45..=-0.35).contains(&r), "corr(raw_material, nt) = {r}");
    assert_eq!(r, manifest.raw_material_nt_correlation);
}

#[test]
fn reference_outliers_are_separable() {
    let (data, manifest) = generate(&GeneratorConfig::with_seed(42)).unwrap();
    let sulfur = ColumnStats::of(&data.column(1));
    for &i in &manifest.outlier_indices {
        assert!(sulfur.forward(data.records()[i].features[1]).abs() > 5.0);
    }
    let clean = filter_outliers(&data);
    for j in 0..N_FEATURES {
        let col = data.column(j);
        let stats = ColumnStats::of(&col);
        assert!(clean.records().iter().all(|r| stats.forward(r.features[j]).abs() < 5.0));
    }

    let unflagged: Vec<_> = data.records().iter().map(|r| r.clone().with_outlier(false)).collect();
    let blind = softsensor::dataset::Dataset::new(unflagged).unwrap();
    let flagged = flag_outliers_zscore(&blind, DEFAULT_ZSCORE_THRESHOLD).unwrap();
    let recovered = manifest
        .outlier_indices
        .iter()
        .filter(|&&i| flagged.records()[i].outlier)
        .count();
    assert!(recovered >= 20, "z-score flagger recovered {recovered}/23");
}
