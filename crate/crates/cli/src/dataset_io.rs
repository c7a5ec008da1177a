//! A windowed dataset on disk: `<stem>.features.csv`, `<stem>.labels.csv`
//! and a `<stem>.json` sidecar with the per-appliance statistics.

use std::path::{Path, PathBuf};

use serde_json::json;
use sparsenilm_core::{LabelSet, WindowedDataset};

use crate::format::exact;

fn write(path: PathBuf, text: String) -> Result<PathBuf, std::io::Error> {
    match std::fs::write(&path, text) {
        Ok(()) => Ok(path),
        Err(e) => Err(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
    }
}

fn label_rows(starts: &[i64], names: &[String], rows: impl Iterator<Item = LabelSet>) -> String {
    let mut out = String::from("window_start");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (t, set) in starts.iter().zip(rows) {
        out.push_str(&t.to_string());
        for i in 0..names.len() {
            out.push_str(if set.contains(i) { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

/// Writes the three files and returns their paths.
pub fn write_dataset(dir: &Path, stem: &str, ds: &WindowedDataset) -> Result<Vec<PathBuf>, std::io::Error> {
    let mut features = String::from("window_start");
    for b in 0..ds.feature_len() {
        features.push_str(&format!(",bin_{b}"));
    }
    features.push('\n');
    for (t, row) in ds.window_starts.iter().zip(&ds.features) {
        features.push_str(&t.to_string());
        for v in row {
            features.push(',');
            features.push_str(&exact(*v));
        }
        features.push('\n');
    }
    let labels = label_rows(&ds.window_starts, &ds.appliance_names, (0..ds.num_windows()).map(|w| ds.labels.row_set(w)));
    let reals = |v: &[f64]| v.iter().map(|x| exact(*x)).collect::<Vec<_>>();
    let sidecar = json!({
        "appliance_names": ds.appliance_names,
        "bin_seconds": ds.bin_seconds,
        "window_seconds": ds.window_seconds,
        "on_threshold": exact(ds.on_threshold),
        "windows": ds.num_windows(),
        "dropped_windows": ds.dropped_windows,
        "mean_on_power": reals(&ds.mean_on_power),
        "actual_energy_wh": reals(&ds.actual_energy),
    });
    Ok(vec![
        write(dir.join(format!("{stem}.features.csv")), features)?,
        write(dir.join(format!("{stem}.labels.csv")), labels)?,
        write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n")?,
    ])
}

/// Predicted label sets in the labels-file layout.
pub fn write_predictions(path: &Path, starts: &[i64], names: &[String], predictions: &[LabelSet]) -> Result<(), std::io::Error> {
    write(path.to_owned(), label_rows(starts, names, predictions.iter().cloned())).map(|_| ())
}
