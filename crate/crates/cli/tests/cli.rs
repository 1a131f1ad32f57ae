use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use softsensor::dataset::{parse_csv, FeatureSchema};
use softsensor::evaluation::{render_table, OutlierSetting};
use softsensor::experiment::{evaluate_sensor, prepare_split, ExperimentConfig};
use softsensor::models::{load_model, ForestParams, ModelKind, NetworkParams, SoftSensor};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softsensor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_dataset(dir: &Path) -> PathBuf {
    let path = dir.join("data.csv");
    let out = run(&["generate", "--out", s(&path), "--rows", "1200", "--outlier-rows", "4", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generate_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_dataset(dir.path());
    let first = fs::read(&a).unwrap();
    let manifest = fs::read(dir.path().join("data.csv.manifest.json")).unwrap();
    let again = small_dataset(dir.path());
    assert_eq!(first, fs::read(again).unwrap());
    assert_eq!(manifest, fs::read(dir.path().join("data.csv.manifest.json")).unwrap());
    let header = String::from_utf8_lossy(&first).lines().next().unwrap().to_string();
    assert!(header.starts_with("raw_material,sulfur,"));
}

#[test]
fn train_then_evaluate_matches_in_process_path() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = small_dataset(dir.path());
    for (flag, kind) in [("rf", ModelKind::RandomForest), ("nn", ModelKind::NeuralNet), ("lm", ModelKind::Linear)] {
        let model_path = dir.path().join(format!("{flag}.json"));
        let out = run(&[
            "train", "--data", s(&data_path), "--out", s(&model_path), "--model", flag,
            "--trees", "15", "--epochs", "30", "--seed", "9", "--outliers", "drop",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let eval = run(&[
            "evaluate", "--data", s(&data_path), "--model-file", s(&model_path), "--seed", "9", "--outliers", "drop",
        ]);
        assert!(eval.status.success());

        let cfg = ExperimentConfig {
            seed: 9,
            forest: ForestParams { n_trees: 15, ..Default::default() },
            network: NetworkParams { epochs: 30, ..Default::default() },
            ..Default::default()
        };
        let data = parse_csv(&data_path, &FeatureSchema::canonical()).unwrap();
        let setting = OutlierSetting::WithoutOutliers;
        let (train, test) = prepare_split(&data, cfg.train_fraction, cfg.seed, setting).unwrap();
        let sensor = SoftSensor::fit(&cfg.spec_for(kind), &train).unwrap();
        assert_eq!(load_model(&model_path).unwrap(), sensor);
        let report = evaluate_sensor(&sensor, &test, setting).unwrap().report;
        let table = render_table("Results on dataset without outliers", &[report]);
        assert_eq!(String::from_utf8(eval.stdout).unwrap(), table);
    }
}

#[test]
fn reproduce_writes_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = small_dataset(dir.path());
    let outputs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for out in &outputs {
        let r = run(&["reproduce", "--data", s(&data_path), "--out", s(out), "--trees", "10", "--epochs", "20"]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&outputs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 13);
    for name in &names {
        assert_eq!(
            fs::read(outputs[0].join(name)).unwrap(),
            fs::read(outputs[1].join(name)).unwrap(),
            "{name:?} differs"
        );
    }
    for table in ["table_with_outliers.txt", "table_without_outliers.txt"] {
        let text = fs::read_to_string(outputs[0].join(table)).unwrap();
        let rows: Vec<&str> = text.lines().skip(3).filter(|l| !l.is_empty()).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows[3].starts_with("Mean value") && rows[3].ends_with("0.000"));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = small_dataset(dir.path());
    let model = dir.path().join("m.json");
    let d = s(&data_path);
    let m = s(&model);

    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["train", "--data", d, "--out", m, "--model", "svm"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--data", d, "--out", m, "--split", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["train", "--data", d, "--out", m, "--trees", "0"]).status.code(), Some(1));
    assert_eq!(run(&["pdp", "--data", d, "--feature", "pressure"]).status.code(), Some(1));
    assert_eq!(run(&["reproduce", "--out", m]).status.code(), Some(1));

    let missing = run(&["train", "--data", s(&dir.path().join("absent.csv")), "--out", m]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.csv"));
    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "a,b\n1,2\n").unwrap();
    assert_eq!(run(&["train", "--data", s(&garbage), "--out", m]).status.code(), Some(2));
    fs::write(&model, "{\"format_version\": 99}").unwrap();
    assert_eq!(run(&["evaluate", "--data", d, "--model-file", m]).status.code(), Some(2));

    let diverged = run(&["train", "--data", d, "--out", m, "--model", "nn", "--lr", "1e6", "--epochs", "5"]);
    assert_eq!(diverged.status.code(), Some(3));
    assert!(diverged.stdout.is_empty());
}
