//! `softsensor` command-line tool.
//!
//! Exit codes: 0 success, 1 bad flags, 2 I/O or input-format error,
//! 3 training failure.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use softsensor::dataset::{parse_csv, write_csv, Dataset, FeatureSchema};
use softsensor::evaluation::{render_table, OutlierSetting};
use softsensor::experiment::{
    evaluate_sensor, prepare_split, run_experiment, write_outputs, ExperimentConfig, DEFAULT_SEED,
    DEFAULT_TRAIN_FRACTION, PDP_FEATURE,
};
use softsensor::interpretation::{partial_dependence, permutation_importance, GridSpec, DEFAULT_GRID_POINTS};
use softsensor::models::{load_model, save_model, ForestParams, ModelKind, NetworkParams, SoftSensor};
use softsensor::seeds::{derive_seed, STREAM_PERMUTATION};
use softsensor::synth::{describe, generate, write_manifest, GeneratorConfig, GeneratorManifest};
use softsensor::Error;

const EXIT_BAD_FLAGS: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_TRAINING: u8 = 3;

#[derive(Parser)]
#[command(name = "softsensor", version, about = "Soft-sensor models for NT prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic dataset and its ground-truth manifest.
    Generate(GenerateArgs),
    /// Fit one model on the training split and save it.
    Train(TrainArgs),
    /// Score a saved model on the test split.
    Evaluate(EvaluateArgs),
    /// Out-of-bag permutation importance of a random forest.
    Importance(ImportanceArgs),
    /// Partial dependence of NT on one feature.
    Pdp(PdpArgs),
    /// Run both outlier settings for all four models and write every report.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelFlag {
    Rf,
    Nn,
    Lm,
    Mean,
}

impl From<ModelFlag> for ModelKind {
    fn from(m: ModelFlag) -> Self {
        match m {
            ModelFlag::Rf => ModelKind::RandomForest,
            ModelFlag::Nn => ModelKind::NeuralNet,
            ModelFlag::Lm => ModelKind::Linear,
            ModelFlag::Mean => ModelKind::MeanBaseline,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutliersFlag {
    Keep,
    Drop,
}

impl From<OutliersFlag> for OutlierSetting {
    fn from(o: OutliersFlag) -> Self {
        match o {
            OutliersFlag::Keep => OutlierSetting::WithOutliers,
            OutliersFlag::Drop => OutlierSetting::WithoutOutliers,
        }
    }
}

#[derive(Args)]
struct SplitArgs {
    /// Fraction of records used for training.
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    split: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "keep")]
    outliers: OutliersFlag,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "rf")]
    model: ModelFlag,
    #[arg(long, default_value_t = ForestParams::default().n_trees)]
    trees: usize,
    #[arg(long, default_value_t = NetworkParams::default().learning_rate)]
    lr: f64,
    #[arg(long, default_value_t = NetworkParams::default().batch_size)]
    batch: usize,
    #[arg(long, default_value_t = NetworkParams::default().epochs)]
    epochs: usize,
}

#[derive(Args)]
struct GenerateArgs {
    /// Destination CSV; the manifest goes next to it as `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = GeneratorConfig::default().n_rows)]
    rows: usize,
    /// Number of injected sulfur outliers.
    #[arg(long, default_value_t = GeneratorConfig::default().n_outliers)]
    outlier_rows: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Destination model document.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model_file: PathBuf,
    /// Optional truth,predicted CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args)]
struct ImportanceArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Saved forest; trained from the flags when omitted.
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[arg(long, default_value_t = ForestParams::default().n_trees)]
    trees: usize,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args)]
struct PdpArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = PDP_FEATURE)]
    feature: String,
    /// Saved model; trained from the flags when omitted.
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, required_unless_present = "synth", conflicts_with = "synth")]
    data: Option<PathBuf>,
    /// Generate the reference synthetic dataset from --seed instead of reading --data.
    #[arg(long)]
    synth: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = ForestParams::default().n_trees)]
    trees: usize,
    #[arg(long, default_value_t = NetworkParams::default().learning_rate)]
    lr: f64,
    #[arg(long, default_value_t = NetworkParams::default().batch_size)]
    batch: usize,
    #[arg(long, default_value_t = NetworkParams::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    split: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidHyperparameters(_) | Error::UnknownFeature(_) | Error::InvalidConfig(_) => EXIT_BAD_FLAGS,
            ref e if e.is_io() => EXIT_IO,
            _ => EXIT_TRAINING,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad_flag(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_BAD_FLAGS,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn check_split(f: f64) -> CmdResult {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(bad_flag(format!("--split must lie in (0, 1), got {f}")))
    }
}

fn check_path(p: &Path, flag: &str) -> CmdResult {
    if p.as_os_str().is_empty() {
        Err(bad_flag(format!("{flag} must not be empty")))
    } else {
        Ok(())
    }
}

fn experiment_config(trees: usize, lr: f64, batch: usize, epochs: usize, split: f64, seed: u64) -> Result<ExperimentConfig, Failure> {
    check_split(split)?;
    let cfg = ExperimentConfig {
        train_fraction: split,
        seed,
        forest: ForestParams {
            n_trees: trees,
            ..Default::default()
        },
        network: NetworkParams {
            learning_rate: lr,
            batch_size: batch,
            epochs,
            ..Default::default()
        },
        ..Default::default()
    };
    cfg.forest.validate()?;
    cfg.network.validate()?;
    Ok(cfg)
}

fn model_config(m: &ModelArgs, s: &SplitArgs) -> Result<ExperimentConfig, Failure> {
    experiment_config(m.trees, m.lr, m.batch, m.epochs, s.split, s.seed)
}

fn load_data(path: &Path) -> Result<Dataset, Failure> {
    check_path(path, "--data")?;
    Ok(parse_csv(path, &FeatureSchema::canonical())?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))?)
}

fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_synthetic(cfg: &GeneratorConfig, out: &Path) -> Result<(Dataset, GeneratorManifest), Failure> {
    let (data, manifest) = generate(cfg)?;
    write_csv(&data, create(out)?)?;
    write_manifest(&manifest, create(&manifest_path(out))?)?;
    Ok((data, manifest))
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    check_path(&a.out, "--out")?;
    let cfg = GeneratorConfig {
        n_rows: a.rows,
        n_outliers: a.outlier_rows,
        seed: a.seed,
        ..Default::default()
    };
    let (_, manifest) = write_synthetic(&cfg, &a.out)?;
    print!("{}", describe(&manifest));
    Ok(())
}

fn fit_sensor(data: &Dataset, cfg: &ExperimentConfig, kind: ModelKind, setting: OutlierSetting) -> Result<(SoftSensor, Dataset), Failure> {
    let (train, _) = prepare_split(data, cfg.train_fraction, cfg.seed, setting)?;
    let sensor = SoftSensor::fit(&cfg.spec_for(kind), &train)?;
    Ok((sensor, train))
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    check_path(&a.out, "--out")?;
    let cfg = model_config(&a.model, &a.split)?;
    let data = load_data(&a.data)?;
    let (sensor, _) = fit_sensor(&data, &cfg, a.model.model.into(), a.split.outliers.into())?;
    save_model(&sensor, &a.out)?;
    println!("saved {} model to {}", sensor.kind(), a.out.display());
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> CmdResult {
    check_split(a.split.split)?;
    check_path(&a.model_file, "--model-file")?;
    let data = load_data(&a.data)?;
    let sensor = load_model(&a.model_file)?;
    let setting: OutlierSetting = a.split.outliers.into();
    let (_, test) = prepare_split(&data, a.split.split, a.split.seed, setting)?;
    let eval = evaluate_sensor(&sensor, &test, setting)?;
    if let Some(out) = &a.out {
        eval.write_pairs_csv(create(out)?)?;
    }
    print!(
        "{}",
        render_table(&format!("Results on dataset {}", setting.label()), &[eval.report])
    );
    Ok(())
}

fn trained_or_loaded(
    model_file: &Option<PathBuf>,
    data: &Dataset,
    cfg: &ExperimentConfig,
    kind: ModelKind,
    setting: OutlierSetting,
) -> Result<(SoftSensor, Dataset), Failure> {
    match model_file {
        Some(path) => {
            let sensor = load_model(path)?;
            let (train, _) = prepare_split(data, cfg.train_fraction, cfg.seed, setting)?;
            Ok((sensor, train))
        }
        None => fit_sensor(data, cfg, kind, setting),
    }
}

fn cmd_importance(a: ImportanceArgs) -> CmdResult {
    let defaults = NetworkParams::default();
    let cfg = experiment_config(a.trees, defaults.learning_rate, defaults.batch_size, defaults.epochs, a.split.split, a.split.seed)?;
    let data = load_data(&a.data)?;
    let (sensor, train) = trained_or_loaded(&a.model_file, &data, &cfg, ModelKind::RandomForest, a.split.outliers.into())?;
    let forest = sensor
        .model
        .as_forest()
        .ok_or_else(|| bad_flag(format!("importance needs a random forest, got {}", sensor.kind())))?;
    let scaled = sensor.standardize(&train)?;
    let report = permutation_importance(forest, &scaled, derive_seed(cfg.seed, STREAM_PERMUTATION), cfg.importance_repeats)?;
    if let Some(out) = &a.out {
        report.write_csv(create(out)?)?;
    }
    for f in &report.features {
        println!("{:<16} {:>10.3}", f.name, f.pct_inc_mse);
    }
    Ok(())
}

fn cmd_pdp(a: PdpArgs) -> CmdResult {
    let cfg = model_config(&a.model, &a.split)?;
    FeatureSchema::canonical().index_of(&a.feature)?;
    let data = load_data(&a.data)?;
    let (sensor, train) = trained_or_loaded(&a.model_file, &data, &cfg, a.model.model.into(), a.split.outliers.into())?;
    let scaled = sensor.standardize(&train)?;
    let curve = partial_dependence(&sensor.model, &scaled, &a.feature, &GridSpec::Quantiles(DEFAULT_GRID_POINTS))?;
    if let Some(out) = &a.out {
        curve.write_csv(create(out)?)?;
    }
    println!(
        "{} grid points for {} over {} records (smoothing window {})",
        curve.grid.len(),
        curve.feature,
        curve.n_background,
        curve.window
    );
    Ok(())
}

fn cmd_reproduce(a: ReproduceArgs) -> CmdResult {
    check_path(&a.out, "--out")?;
    let cfg = experiment_config(a.trees, a.lr, a.batch, a.epochs, a.split, a.seed)?;
    let data = match &a.data {
        Some(path) => load_data(path)?,
        None => write_synthetic(&GeneratorConfig::with_seed(a.seed), &a.out.join("synthetic.csv"))?.0,
    };
    let result = run_experiment(&data, &cfg)?;
    let written = write_outputs(&result, &a.out)?;
    for s in &result.settings {
        println!("{}", s.table());
    }
    eprintln!("wrote {} files to {}", written.len(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_FLAGS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Importance(a) => cmd_importance(a),
        Command::Pdp(a) => cmd_pdp(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
