//! The experiment pipeline: load, resample, windowize, split, fit, predict,
//! evaluate. Each subcommand is a prefix of it plus file output.

use std::path::{Path, PathBuf};

use sparsenilm_core::dataset::{chronological_split, synth_generate, windowize};
use sparsenilm_core::metrics::evaluate;
use sparsenilm_core::{ClassifierError, Household, LabelMatrix, LabelSet, TrainingDictionary, WindowedDataset};

use crate::config::{ExperimentConfig, Source};
use crate::dataset_io::{write_dataset, write_predictions};
use crate::error::{CliError, ExitKind};
use crate::ingest::{ingest_csv, write_household_csv};
use crate::model::Model;
use crate::report::Report;

pub const HOUSEHOLD_FILE: &str = "household.csv";
pub const MODEL_FILE: &str = "model.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";

/// Chronological train/test halves of the windowed data.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: WindowedDataset,
    pub test: WindowedDataset,
    pub dropped_windows: usize,
}

pub fn load_household(cfg: &ExperimentConfig) -> Result<Household, CliError> {
    match cfg.source {
        Source::Synth => synth_generate(&cfg.synth).map_err(|e| CliError::dataset("synth", e)),
        Source::Csv => {
            let path = cfg.csv_path.as_deref().ok_or_else(|| {
                CliError::new("config", "Invalid", "source = csv needs csv.path", ExitKind::Usage)
            })?;
            ingest_csv(path, &cfg.csv_schema).map_err(CliError::ingest)
        }
    }
}

pub fn split_household(cfg: &ExperimentConfig, house: &Household) -> Result<Split, CliError> {
    let resampled = house.resample(cfg.bin_seconds).map_err(|e| CliError::dataset("resample", e))?;
    let ds = windowize(&resampled, cfg.window_seconds, cfg.on_threshold).map_err(|e| CliError::dataset("windowize", e))?;
    let (train, test) = chronological_split(&ds, cfg.train_fraction).map_err(|e| CliError::dataset("split", e))?;
    Ok(Split { train, test, dropped_windows: ds.dropped_windows })
}

pub fn fit_model(cfg: &ExperimentConfig, train: &WindowedDataset) -> Result<Model, CliError> {
    let dictionary = TrainingDictionary::fit(&train.features, &train.label_sets(), train.num_appliances())
        .map_err(|e| CliError::classifier("fit", e))?;
    Ok(Model {
        dictionary,
        appliance_names: train.appliance_names.clone(),
        mean_on_power: train.mean_on_power.clone(),
        train_windows: train.num_windows(),
        config: cfg.echo(),
    })
}

fn threads(cfg: &ExperimentConfig) -> usize {
    match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
}

pub fn predict(cfg: &ExperimentConfig, model: &Model, test: &WindowedDataset) -> Result<Vec<LabelSet>, CliError> {
    let mismatch = |what: &str, expected: usize, found: usize| {
        let e = ClassifierError::DimensionMismatch { expected, found };
        CliError::new("predict", "DimensionMismatch", format!("{what}: {e}"), ExitKind::Data)
    };
    if model.dictionary.window_len() != test.feature_len() {
        return Err(mismatch("window length", model.dictionary.window_len(), test.feature_len()));
    }
    if model.dictionary.num_classes() != test.num_appliances() {
        return Err(mismatch("appliance count", model.dictionary.num_classes(), test.num_appliances()));
    }
    if model.appliance_names != test.appliance_names {
        return Err(CliError::new(
            "predict",
            "ApplianceMismatch",
            format!("model appliances {:?} differ from data appliances {:?}", model.appliance_names, test.appliance_names),
            ExitKind::Data,
        ));
    }
    model
        .dictionary
        .predict_batch_parallel(&test.features, &cfg.classifier, threads(cfg))
        .map_err(|e| CliError::classifier("predict", e))
}

pub fn evaluate_predictions(
    cfg: &ExperimentConfig,
    model: &Model,
    split: &Split,
    predictions: &[LabelSet],
) -> Result<Report, CliError> {
    let pred = LabelMatrix::from_sets(predictions, split.test.num_appliances());
    let mut evaluation = evaluate(&pred, &split.test, &model.mean_on_power).map_err(CliError::metrics)?;
    evaluation.config = cfg.echo();
    Ok(Report {
        evaluation,
        train_windows: model.train_windows,
        test_windows: split.test.num_windows(),
        dropped_windows: split.dropped_windows,
        untrained_appliances: model.dictionary.empty_classes().iter().map(|&k| model.appliance_names[k].clone()).collect(),
    })
}

fn create_out(cfg: &ExperimentConfig) -> Result<&Path, CliError> {
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::io("write", std::io::Error::new(e.kind(), format!("{}: {e}", cfg.out.display()))))?;
    Ok(&cfg.out)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::io("write", std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_report(dir: &Path, report: &Report) -> Result<Vec<PathBuf>, CliError> {
    let json = dir.join(REPORT_JSON);
    let text = dir.join(REPORT_TEXT);
    write_file(&json, &report.to_json())?;
    write_file(&text, &report.to_table())?;
    Ok(vec![json, text])
}

fn keep_datasets(dir: &Path, split: &Split) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = write_dataset(dir, "train", &split.train).map_err(|e| CliError::io("write", e))?;
    paths.extend(write_dataset(dir, "test", &split.test).map_err(|e| CliError::io("write", e))?);
    Ok(paths)
}

/// Writes the synthetic household as `household.csv`.
pub fn cmd_synth(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let house = synth_generate(&cfg.synth).map_err(|e| CliError::dataset("synth", e))?;
    let path = create_out(cfg)?.join(HOUSEHOLD_FILE);
    write_household_csv(&path, &house).map_err(CliError::ingest)?;
    Ok(vec![path])
}

/// Fits on the train split and writes `model.json`; `keep` adds the split
/// datasets.
pub fn cmd_fit(cfg: &ExperimentConfig, keep: bool) -> Result<Vec<PathBuf>, CliError> {
    let split = split_household(cfg, &load_household(cfg)?)?;
    let model = fit_model(cfg, &split.train)?;
    let dir = create_out(cfg)?;
    let path = dir.join(MODEL_FILE);
    model.save(&path).map_err(CliError::model)?;
    let mut paths = vec![path];
    if keep {
        paths.extend(keep_datasets(dir, &split)?);
    }
    Ok(paths)
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    Model::load(path).map_err(CliError::model)
}

/// Writes test-split predictions as `predictions.csv`.
pub fn cmd_predict(cfg: &ExperimentConfig, model_path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let model = load_model(model_path)?;
    let split = split_household(cfg, &load_household(cfg)?)?;
    let predictions = predict(cfg, &model, &split.test)?;
    let path = create_out(cfg)?.join(PREDICTIONS_FILE);
    write_predictions(&path, &split.test.window_starts, &split.test.appliance_names, &predictions)
        .map_err(|e| CliError::io("write", e))?;
    Ok(vec![path])
}

/// Scores the test split with a saved model; writes `report.json` and
/// `report.txt`.
pub fn cmd_eval(cfg: &ExperimentConfig, model_path: &Path) -> Result<(Report, Vec<PathBuf>), CliError> {
    let model = load_model(model_path)?;
    let split = split_household(cfg, &load_household(cfg)?)?;
    let predictions = predict(cfg, &model, &split.test)?;
    let report = evaluate_predictions(cfg, &model, &split, &predictions)?;
    let paths = write_report(create_out(cfg)?, &report)?;
    Ok((report, paths))
}

/// Fit and eval in one pass. Only the reports are written unless `keep` is
/// set, which adds the household (synthetic source), model, split datasets
/// and predictions.
pub fn cmd_run(cfg: &ExperimentConfig, keep: bool) -> Result<(Report, Vec<PathBuf>), CliError> {
    let house = load_household(cfg)?;
    let split = split_household(cfg, &house)?;
    let model = fit_model(cfg, &split.train)?;
    let predictions = predict(cfg, &model, &split.test)?;
    let report = evaluate_predictions(cfg, &model, &split, &predictions)?;
    let dir = create_out(cfg)?;
    let mut paths = write_report(dir, &report)?;
    if keep {
        if cfg.source == Source::Synth {
            let path = dir.join(HOUSEHOLD_FILE);
            write_household_csv(&path, &house).map_err(CliError::ingest)?;
            paths.push(path);
        }
        let path = dir.join(MODEL_FILE);
        model.save(&path).map_err(CliError::model)?;
        paths.push(path);
        paths.extend(keep_datasets(dir, &split)?);
        let path = dir.join(PREDICTIONS_FILE);
        write_predictions(&path, &split.test.window_starts, &split.test.appliance_names, &predictions)
            .map_err(|e| CliError::io("write", e))?;
        paths.push(path);
    }
    Ok((report, paths))
}
