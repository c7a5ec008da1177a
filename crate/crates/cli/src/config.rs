//! Experiment configuration: a flat `key = value` file plus command-line
//! overrides. Later sources win: defaults, then the file, then flags.
//!
//! ```text
//! # comment
//! source = synth
//! seed = 7
//! solver.method = fista
//! solver.lambda = auto
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use sparsenilm_core::dataset::{
    SynthConfig, DEFAULT_BIN_SECONDS, DEFAULT_ON_THRESHOLD, DEFAULT_TRAIN_FRACTION, DEFAULT_WINDOW_SECONDS,
};
use sparsenilm_core::{ClassifierConfig, Method};

use crate::format::exact;
use crate::ingest::CsvSchema;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {0:?} given twice")]
    DuplicateKey(String),
    #[error("{key}: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Synth,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub csv_path: Option<PathBuf>,
    pub csv_schema: CsvSchema,
    /// `seed` lives here and drives the generator.
    pub synth: SynthConfig,
    pub bin_seconds: i64,
    pub window_seconds: i64,
    pub on_threshold: f64,
    pub train_fraction: f64,
    pub classifier: ClassifierConfig,
    pub out: PathBuf,
    /// Prediction workers; 0 means one per available core. Output does not
    /// depend on it, so it is not echoed.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: Source::Synth,
            csv_path: None,
            csv_schema: CsvSchema::default(),
            synth: SynthConfig::default(),
            bin_seconds: DEFAULT_BIN_SECONDS,
            window_seconds: DEFAULT_WINDOW_SECONDS,
            on_threshold: DEFAULT_ON_THRESHOLD,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            classifier: ClassifierConfig::default(),
            out: PathBuf::from("sparsenilm-out"),
            threads: 0,
        }
    }
}

fn bad(key: &str, value: &str) -> ConfigError {
    ConfigError::BadValue { key: key.to_owned(), value: value.to_owned() }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, value))
}

fn list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect()
}

fn num_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    list(value).iter().map(|v| num(key, v)).collect()
}

fn auto_or(key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| exact(*v)).collect::<Vec<_>>().join(",")
}

/// A per-appliance setting given either once for all appliances or as a list.
#[derive(Debug, Clone)]
enum PerAppliance {
    Shared(f64),
    Each(Vec<f64>),
}

impl PerAppliance {
    fn parse(key: &str, value: &str) -> Result<Self, ConfigError> {
        let v = num_list(key, value)?;
        match v.len() {
            0 => Err(bad(key, value)),
            1 => Ok(PerAppliance::Shared(v[0])),
            _ => Ok(PerAppliance::Each(v)),
        }
    }

    fn expand(self, n: usize) -> Vec<f64> {
        match self {
            PerAppliance::Shared(v) => vec![v; n],
            PerAppliance::Each(v) => v,
        }
    }
}

#[derive(Default)]
struct SynthOverrides {
    names: Option<Vec<String>>,
    powers: Option<Vec<f64>>,
    p_on: Option<PerAppliance>,
    p_off: Option<PerAppliance>,
}

impl ExperimentConfig {
    /// Defaults overlaid with `file` (if any) and then `overrides`.
    pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        let mut base_dir = None;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Read { path: path.to_owned(), message: e.to_string() })?;
            pairs = parse_pairs(&text)?;
            base_dir = path.parent().map(Path::to_owned);
        }
        let mut cfg = ExperimentConfig::default();
        let mut synth = SynthOverrides::default();
        for (key, value) in &pairs {
            cfg.apply(key, value, &mut synth, base_dir.as_deref())?;
        }
        for (key, value) in overrides {
            cfg.apply(key, value, &mut synth, None)?;
        }
        cfg.finish_synth(synth)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str, synth: &mut SynthOverrides, base: Option<&Path>) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "source" => {
                self.source = match value {
                    "synth" => Source::Synth,
                    "csv" => Source::Csv,
                    _ => return Err(bad(key, value)),
                }
            }
            "csv.path" => {
                let p = PathBuf::from(value);
                self.csv_path = Some(match base {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p,
                });
            }
            "csv.timestamp" => self.csv_schema.timestamp = value.to_owned(),
            "csv.aggregate" => self.csv_schema.aggregate = value.to_owned(),
            "csv.appliances" => {
                self.csv_schema.appliances = if value == "auto" { None } else { Some(list(value)) }
            }
            "seed" => self.synth.seed = num(key, value)?,
            "synth.appliances" => synth.names = Some(list(value)),
            "synth.rated_powers" => synth.powers = Some(num_list(key, value)?),
            "synth.p_on_stay" => synth.p_on = Some(PerAppliance::parse(key, value)?),
            "synth.p_off_stay" => synth.p_off = Some(PerAppliance::parse(key, value)?),
            "synth.noise_std" => self.synth.noise_std = num(key, value)?,
            "synth.duration_hours" => self.synth.duration_hours = num(key, value)?,
            "synth.step_seconds" => self.synth.step_seconds = num(key, value)?,
            "synth.start_timestamp" => self.synth.start_timestamp = num(key, value)?,
            "bin_seconds" => self.bin_seconds = num(key, value)?,
            "window_seconds" => self.window_seconds = num(key, value)?,
            "on_threshold" => self.on_threshold = num(key, value)?,
            "train_fraction" => self.train_fraction = num(key, value)?,
            "classifier.tau" => self.classifier.tau = num(key, value)?,
            "classifier.vacancy_norm_threshold" => self.classifier.vacancy_norm_threshold = num(key, value)?,
            "solver.method" => self.classifier.solver.method = value.parse::<Method>().map_err(|_| bad(key, value))?,
            "solver.max_sparsity" => self.classifier.solver.max_sparsity = num(key, value)?,
            "solver.lambda" => self.classifier.solver.lambda = auto_or(key, value)?,
            "solver.max_iterations" => self.classifier.solver.max_iterations = num(key, value)?,
            "solver.tolerance" => self.classifier.solver.tolerance = auto_or(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "threads" => self.threads = num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    fn finish_synth(&mut self, o: SynthOverrides) -> Result<(), ConfigError> {
        let s = &mut self.synth;
        if let Some(powers) = o.powers {
            let n = powers.len();
            let keep_probs = |v: &Vec<f64>| if v.len() == n { v.clone() } else { vec![v[0]; n] };
            s.p_on_stay = keep_probs(&s.p_on_stay);
            s.p_off_stay = keep_probs(&s.p_off_stay);
            if s.appliance_names.len() != n {
                s.appliance_names = (0..n).map(|i| format!("appliance_{i}")).collect();
            }
            s.rated_powers = powers;
        }
        let n = s.rated_powers.len();
        if let Some(names) = o.names {
            s.appliance_names = names;
        }
        if let Some(p) = o.p_on {
            s.p_on_stay = p.expand(n);
        }
        if let Some(p) = o.p_off {
            s.p_off_stay = p.expand(n);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.source == Source::Csv && self.csv_path.is_none() {
            return invalid("source = csv needs csv.path".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return invalid(format!("train_fraction {} is outside (0, 1)", self.train_fraction));
        }
        if !(self.on_threshold.is_finite() && self.on_threshold >= 0.0) {
            return invalid(format!("on_threshold {} must be a nonnegative number of watts", self.on_threshold));
        }
        if self.bin_seconds <= 0 || self.window_seconds <= 0 || self.window_seconds % self.bin_seconds != 0 {
            return invalid("window_seconds must be a positive multiple of bin_seconds".into());
        }
        if let Err(e) = self.classifier.validate() {
            return invalid(e.to_string());
        }
        if let Err(e) = self.synth.validate() {
            return invalid(format!("synth: {e}"));
        }
        let mut seen = BTreeSet::new();
        if let Some(name) = self.synth.appliance_names.iter().find(|n| !seen.insert(n.as_str())) {
            return invalid(format!("synth: appliance name {name:?} appears twice"));
        }
        Ok(())
    }

    /// Every setting that can change a result, in a fixed order, with values
    /// written so that feeding them back as a config file reproduces them.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(&str, String)> = Vec::new();
        match self.source {
            Source::Synth => {
                let s = &self.synth;
                out.push(("source", "synth".into()));
                out.push(("seed", s.seed.to_string()));
                out.push(("synth.appliances", s.appliance_names.join(",")));
                out.push(("synth.rated_powers", join(&s.rated_powers)));
                out.push(("synth.p_on_stay", join(&s.p_on_stay)));
                out.push(("synth.p_off_stay", join(&s.p_off_stay)));
                out.push(("synth.noise_std", exact(s.noise_std)));
                out.push(("synth.duration_hours", s.duration_hours.to_string()));
                out.push(("synth.step_seconds", s.step_seconds.to_string()));
                out.push(("synth.start_timestamp", s.start_timestamp.to_string()));
            }
            Source::Csv => {
                out.push(("source", "csv".into()));
                let path = self.csv_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
                out.push(("csv.path", path));
                out.push(("csv.timestamp", self.csv_schema.timestamp.clone()));
                out.push(("csv.aggregate", self.csv_schema.aggregate.clone()));
                let apps = self.csv_schema.appliances.as_ref().map_or("auto".into(), |a| a.join(","));
                out.push(("csv.appliances", apps));
            }
        }
        let c = &self.classifier;
        let auto = |v: Option<f64>| v.map_or("auto".into(), exact);
        out.extend([
            ("bin_seconds", self.bin_seconds.to_string()),
            ("window_seconds", self.window_seconds.to_string()),
            ("on_threshold", exact(self.on_threshold)),
            ("train_fraction", exact(self.train_fraction)),
            ("classifier.tau", exact(c.tau)),
            ("classifier.vacancy_norm_threshold", exact(c.vacancy_norm_threshold)),
            ("solver.method", c.solver.method.as_str().into()),
            ("solver.max_sparsity", c.solver.max_sparsity.to_string()),
            ("solver.lambda", auto(c.solver.lambda)),
            ("solver.max_iterations", c.solver.max_iterations.to_string()),
            ("solver.tolerance", auto(c.solver.tolerance)),
        ]);
        out.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
    }
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(ConfigError::DuplicateKey(key.to_owned()));
        }
        pairs.push((key.to_owned(), value.trim().to_owned()));
    }
    Ok(pairs)
}
