//! Report emission: JSON with a fixed key order and 6-significant-digit
//! decimal strings, and an aligned text table. Undefined values are `null` in
//! JSON and `n/a` in the table.

use serde_json::{json, Map, Value};
use sparsenilm_core::EvaluationReport;

use crate::format::sig6;

pub const REPORT_FORMAT: &str = "sparsenilm-report";
pub const REPORT_VERSION: u64 = 1;

/// An evaluation plus the split bookkeeping that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub evaluation: EvaluationReport,
    pub train_windows: usize,
    pub test_windows: usize,
    pub dropped_windows: usize,
    /// Appliances with no ON window in the training split; never predicted.
    pub untrained_appliances: Vec<String>,
}

fn opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |x| Value::String(sig6(x)))
}

impl Report {
    pub fn to_json(&self) -> String {
        let e = &self.evaluation;
        let appliances: Vec<Value> = e
            .per_appliance
            .iter()
            .zip(e.counts.per_label())
            .map(|(a, c)| {
                json!({
                    "name": a.name,
                    "f1": sig6(a.f1.value),
                    "f1_degenerate": a.f1.degenerate,
                    "energy_error": opt(a.energy_error),
                    "estimated_energy_wh": sig6(a.estimated_energy),
                    "actual_energy_wh": sig6(a.actual_energy),
                    "tp": c.tp,
                    "fp": c.fp,
                    "fn": c.fn_,
                    "tn": c.tn,
                })
            })
            .collect();
        let degenerate: Vec<&str> =
            e.f1_macro.degenerate_labels.iter().map(|&i| e.per_appliance[i].name.as_str()).collect();
        let config: Map<String, Value> = e.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let doc = json!({
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "macro_f1": sig6(e.f1_macro.value),
            "micro_f1": sig6(e.f1_micro.value),
            "micro_f1_degenerate": e.f1_micro.degenerate,
            "aee": opt(e.aee),
            "appliances": appliances,
            "degenerate_f1_appliances": degenerate,
            "untrained_appliances": self.untrained_appliances,
            "windows": {
                "train": self.train_windows,
                "test": self.test_windows,
                "dropped": self.dropped_windows,
            },
            "config": config,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    /// Overall scores, then one row per appliance.
    pub fn to_table(&self) -> String {
        let e = &self.evaluation;
        let na = |v: Option<f64>| v.map_or("n/a".to_owned(), sig6);
        let mut out = table(
            &["Macro F1-measure", "Micro F1-measure", "Average energy error"],
            &[vec![sig6(e.f1_macro.value), sig6(e.f1_micro.value), na(e.aee)]],
        );
        out.push('\n');
        let rows: Vec<Vec<String>> = e
            .per_appliance
            .iter()
            .map(|a| vec![a.name.clone(), na(a.energy_error), sig6(a.f1.value)])
            .collect();
        out.push_str(&table(&["Appliance", "Error", "F1-score"], &rows));
        out
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
        let padded: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_owned() + "\n"
    };
    let mut out = line(&mut header.iter().copied());
    out.push_str(&line(&mut widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str)));
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}
