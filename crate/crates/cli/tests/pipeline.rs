use std::path::{Path, PathBuf};
use std::process::Command;

use sparsenilm::commands::{fit_model, load_household, split_household, HOUSEHOLD_FILE, MODEL_FILE, REPORT_JSON};
use sparsenilm::{cmd_eval, cmd_fit, cmd_run, cmd_synth, ingest_csv, CsvSchema, ExperimentConfig, IngestError, Model};

fn config(out: &Path, extra: &[(&str, &str)]) -> ExperimentConfig {
    let mut pairs = vec![("out".to_string(), out.display().to_string()), ("synth.duration_hours".into(), "120".into())];
    pairs.extend(extra.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    ExperimentConfig::resolve(None, &pairs).unwrap()
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsenilm"))
}

#[test]
fn synth_output_reingests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[]);
    let path = &cmd_synth(&cfg).unwrap()[0];
    let house = ingest_csv(path, &CsvSchema::default()).unwrap();
    let original = load_household(&cfg).unwrap();
    assert_eq!(house, original, "decimal output must parse back to the generated values");
}

#[test]
fn synth_is_byte_identical_per_seed_and_varies_with_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    cmd_synth(&config(a.path(), &[])).unwrap();
    cmd_synth(&config(b.path(), &[])).unwrap();
    cmd_synth(&config(c.path(), &[("seed", "43")])).unwrap();
    assert_eq!(read(a.path().join(HOUSEHOLD_FILE)), read(b.path().join(HOUSEHOLD_FILE)));
    assert_ne!(read(a.path().join(HOUSEHOLD_FILE)), read(c.path().join(HOUSEHOLD_FILE)));
}

#[test]
fn one_hour_gives_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[("synth.duration_hours", "1")]);
    let text = String::from_utf8(read(&cmd_synth(&cfg).unwrap()[0])).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "timestamp,aggregate,appliance_0,appliance_1,appliance_2,appliance_3,appliance_4");
    assert_eq!(lines.len(), 1 + 6);
}

#[test]
fn saved_model_loads_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[]);
    cmd_fit(&cfg, false).unwrap();
    let loaded = Model::load(&dir.path().join(MODEL_FILE)).unwrap();
    let split = split_household(&cfg, &load_household(&cfg).unwrap()).unwrap();
    let fresh = fit_model(&cfg, &split.train).unwrap();
    assert_eq!(loaded, fresh);
    let bits = |m: &Model| -> Vec<u64> {
        let d = m.dictionary.design();
        d.matrix().as_column_major().iter().chain(d.column_norms()).chain(&m.mean_on_power).map(|v| v.to_bits()).collect()
    };
    assert_eq!(bits(&loaded), bits(&fresh));
    assert_eq!(loaded.dictionary.num_classes(), 5);
    assert_eq!(loaded.to_json(), fresh.to_json());
}

#[test]
fn empty_training_split_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[]);
    let split = split_household(&cfg, &load_household(&cfg).unwrap()).unwrap();
    let err = fit_model(&cfg, &split.train.subset(0..0)).unwrap_err();
    assert_eq!((err.stage, err.kind.as_str()), ("fit", "EmptyTrainingSet"));
}

#[test]
fn eval_is_deterministic_and_run_is_fit_plus_eval() {
    let fit_dir = tempfile::tempdir().unwrap();
    let run_dir = tempfile::tempdir().unwrap();
    let cfg = config(fit_dir.path(), &[]);
    cmd_fit(&cfg, false).unwrap();
    let model = fit_dir.path().join(MODEL_FILE);
    cmd_eval(&cfg, &model).unwrap();
    let first = read(fit_dir.path().join(REPORT_JSON));
    cmd_eval(&cfg, &model).unwrap();
    assert_eq!(first, read(fit_dir.path().join(REPORT_JSON)));

    let (_, paths) = cmd_run(&config(run_dir.path(), &[]), false).unwrap();
    assert_eq!(first, read(run_dir.path().join(REPORT_JSON)));
    assert_eq!(paths.len(), 2, "only reports without --keep");
}

#[test]
fn report_embeds_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &[("classifier.tau", "1.5")]);
    let (report, _) = cmd_run(&cfg, false).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&read(dir.path().join(REPORT_JSON))).unwrap();
    let echoed: Vec<(String, String)> = doc["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap().to_owned()))
        .collect();
    assert_eq!(echoed, report.evaluation.config);
    let mut replay_pairs = echoed.clone();
    replay_pairs.push(("out".into(), dir.path().display().to_string()));
    assert_eq!(ExperimentConfig::resolve(None, &replay_pairs).unwrap(), cfg);
    assert_eq!(doc["windows"]["train"], 12);
    assert_eq!(doc["windows"]["test"], 108);
}

#[test]
fn window_length_mismatch_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = bin().args(["fit", "--out", out, "--set", "synth.duration_hours=48"]).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = bin()
        .args(["eval", "--out", out, "--set", "synth.duration_hours=48", "--set", "window_seconds=7200"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "DimensionMismatch");
    assert_eq!(err["error"]["stage"], "predict");
}

#[test]
fn missing_input_file_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let missing: PathBuf = dir.path().join("absent.csv");
    let out = bin()
        .args(["run", "--out", dir.path().to_str().unwrap(), "--set", "source=csv"])
        .arg("--set")
        .arg(format!("csv.path={}", missing.display()))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["stage"], "ingest");
    assert_eq!(err["error"]["kind"], "Io");
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().args(["run", "--tau", "banana"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["run", "--set", "no.such.key=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "UnknownKey");
    let out = bin().args(["run", "--tau", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn keep_writes_intermediates() {
    let dir = tempfile::tempdir().unwrap();
    let (_, paths) = cmd_run(&config(dir.path(), &[]), true).unwrap();
    for name in [HOUSEHOLD_FILE, MODEL_FILE, "train.features.csv", "test.labels.csv", "test.json", "predictions.csv"] {
        assert!(paths.contains(&dir.path().join(name)), "{name}");
    }
    let features = String::from_utf8(read(dir.path().join("train.features.csv"))).unwrap();
    assert!(features.lines().skip(1).all(|l| l.split(',').count() == 7));
}

fn write_csv(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("house.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn ingest_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_csv(dir.path(), "timestamp,aggregate,fridge\n0,120.5,80\n60,121,80.5\n120,40,0\n");
    let house = ingest_csv(&path, &CsvSchema::default()).unwrap();
    assert_eq!(house.num_appliances(), 1);
    assert_eq!(house.appliance_names, vec!["fridge"]);
    assert_eq!(house.aggregate.len(), 3);
    assert_eq!(house.aggregate.timestamps(), &[0, 60, 120]);
    assert_eq!(house.appliances[0].values(), &[80.0, 80.5, 0.0]);
}

#[test]
fn ingest_errors() {
    let dir = tempfile::tempdir().unwrap();
    let schema = CsvSchema::default();
    let err = ingest_csv(&write_csv(dir.path(), "timestamp,mains,fridge\n0,1,1\n"), &schema).unwrap_err();
    assert!(matches!(err, IngestError::MissingColumn(ref c) if c == "aggregate"), "{err}");
    let err = ingest_csv(&write_csv(dir.path(), "timestamp,aggregate,fridge\n0,1,1\n120,1,1\n60,1,1\n"), &schema).unwrap_err();
    assert!(matches!(err, IngestError::NonMonotonicTimestamp { row: 3 }), "{err}");
    let err = ingest_csv(&write_csv(dir.path(), "timestamp,aggregate,fridge\n0,1,1\n0,1,1\n"), &schema).unwrap_err();
    assert!(matches!(err, IngestError::NonMonotonicTimestamp { row: 2 }), "{err}");
    let err = ingest_csv(&write_csv(dir.path(), "timestamp,aggregate,fridge\n0,1,1\n60,1,-2\n"), &schema).unwrap_err();
    assert!(matches!(err, IngestError::NegativePower { row: 2, ref column } if column == "fridge"), "{err}");
    let err = ingest_csv(&write_csv(dir.path(), "timestamp,aggregate,fridge\n0,1,1\n2011-04-18 13:22:09,1,1\n"), &schema).unwrap_err();
    assert!(matches!(err, IngestError::BadTimestamp { row: 2, .. }), "{err}");
}

#[test]
fn ingest_iso_timestamps_with_schema_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_csv(
        dir.path(),
        "localminute,use,refrigerator1,air1,unused\n\
         2014-01-01 00:00:00,300,100,200,9\n\
         2014-01-01 00:01:00,310,105,200,9\n",
    );
    let schema = CsvSchema {
        timestamp: "localminute".into(),
        aggregate: "use".into(),
        appliances: Some(vec!["air1".into(), "refrigerator1".into()]),
    };
    let house = ingest_csv(&path, &schema).unwrap();
    assert_eq!(house.appliance_names, vec!["air1", "refrigerator1"]);
    assert_eq!(house.aggregate.timestamps(), &[1_388_534_400, 1_388_534_460]);
    assert_eq!(house.appliances[1].values(), &[100.0, 105.0]);
}
