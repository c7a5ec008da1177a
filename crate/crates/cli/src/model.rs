//! Versioned JSON model file.
//!
//! Reals are stored as shortest round-trip decimal strings, so a saved model
//! loads back bit-for-bit.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sparsenilm_core::{DesignMatrix, LabelSet, Matrix, TrainingDictionary};

use crate::format::{exact, parse_exact};

pub const MODEL_FORMAT: &str = "sparsenilm-model";
pub const MODEL_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format {format:?} version {version}")]
    Version { format: String, version: u64 },
    #[error("field {0:?} is missing or malformed")]
    Field(&'static str),
    #[error("model is inconsistent: {0}")]
    Inconsistent(String),
}

/// A fitted dictionary plus what evaluation needs from the training side.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub dictionary: TrainingDictionary,
    pub appliance_names: Vec<String>,
    /// Train-split mean ON power per appliance, in watts.
    pub mean_on_power: Vec<f64>,
    pub train_windows: usize,
    pub config: Vec<(String, String)>,
}

fn reals(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|v| Value::String(exact(*v))).collect())
}

impl Model {
    pub fn to_json(&self) -> String {
        let d = &self.dictionary;
        let design = d.design();
        let columns: Vec<Value> = (0..design.cols()).map(|j| reals(design.column(j))).collect();
        let labels: Vec<Value> = d.column_labels().iter().map(|l| json!(l.ids())).collect();
        let config: Map<String, Value> =
            self.config.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let doc = json!({
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "rows": design.rows(),
            "cols": design.cols(),
            "num_classes": d.num_classes(),
            "appliance_names": self.appliance_names,
            "mean_on_power": reals(&self.mean_on_power),
            "train_windows": self.train_windows,
            "column_norms": reals(design.column_norms()),
            "column_labels": labels,
            "columns": columns,
            "config": config,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let doc: Value = serde_json::from_str(text)?;
        let format = doc["format"].as_str().unwrap_or_default().to_owned();
        let version = doc["version"].as_u64().unwrap_or(0);
        if format != MODEL_FORMAT || version != MODEL_VERSION {
            return Err(ModelError::Version { format, version });
        }
        let usize_field = |name: &'static str| doc[name].as_u64().map(|v| v as usize).ok_or(ModelError::Field(name));
        let rows = usize_field("rows")?;
        let cols = usize_field("cols")?;
        let num_classes = usize_field("num_classes")?;
        let train_windows = usize_field("train_windows")?;

        let real_array = |v: &Value, name: &'static str| -> Result<Vec<f64>, ModelError> {
            v.as_array()
                .ok_or(ModelError::Field(name))?
                .iter()
                .map(|x| x.as_str().and_then(parse_exact).ok_or(ModelError::Field(name)))
                .collect()
        };
        let appliance_names: Vec<String> = doc["appliance_names"]
            .as_array()
            .ok_or(ModelError::Field("appliance_names"))?
            .iter()
            .map(|v| v.as_str().map(str::to_owned).ok_or(ModelError::Field("appliance_names")))
            .collect::<Result<_, _>>()?;
        let mean_on_power = real_array(&doc["mean_on_power"], "mean_on_power")?;
        let column_norms = real_array(&doc["column_norms"], "column_norms")?;

        let column_values = doc["columns"].as_array().ok_or(ModelError::Field("columns"))?;
        if column_values.len() != cols || column_norms.len() != cols {
            return Err(ModelError::Inconsistent(format!("expected {cols} columns and norms")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for c in column_values {
            let c = real_array(c, "columns")?;
            if c.len() != rows {
                return Err(ModelError::Inconsistent(format!("column of length {} in a {rows}-row model", c.len())));
            }
            data.extend(c);
        }

        let label_values = doc["column_labels"].as_array().ok_or(ModelError::Field("column_labels"))?;
        let column_labels: Vec<LabelSet> = label_values
            .iter()
            .map(|l| {
                l.as_array()
                    .ok_or(ModelError::Field("column_labels"))?
                    .iter()
                    .map(|id| id.as_u64().map(|v| v as usize).ok_or(ModelError::Field("column_labels")))
                    .collect::<Result<LabelSet, _>>()
            })
            .collect::<Result<_, _>>()?;
        if appliance_names.len() != num_classes || mean_on_power.len() != num_classes {
            return Err(ModelError::Inconsistent(format!("expected {num_classes} appliance names and ON powers")));
        }

        let inconsistent = |e: &dyn std::fmt::Display| ModelError::Inconsistent(e.to_string());
        let matrix = Matrix::from_column_major(rows, cols, data).map_err(|e| inconsistent(&e))?;
        let design = DesignMatrix::from_normalized(matrix, column_norms).map_err(|e| inconsistent(&e))?;
        let dictionary = TrainingDictionary::from_parts(design, column_labels, num_classes).map_err(|e| inconsistent(&e))?;
        let config = doc["config"]
            .as_object()
            .ok_or(ModelError::Field("config"))?
            .iter()
            .map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_owned())).ok_or(ModelError::Field("config")))
            .collect::<Result<_, _>>()?;
        Ok(Model { dictionary, appliance_names, mean_on_power, train_windows, config })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io { path: path.to_owned(), source })
    }

    pub fn load(path: &Path) -> Result<Model, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.to_owned(), source })?;
        Model::from_json(&text)
    }
}
