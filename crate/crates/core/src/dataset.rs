//! Power traces, resampling, hourly windowing, chronological splitting and a
//! Markov-chain household generator.
//!
//! The default protocol averages active power into 10-minute bins and cuts
//! the aggregate into one-hour windows of six bins. An appliance is ON in a
//! window when its mean power over the window exceeds `on_threshold`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::labels::{LabelMatrix, LabelSet};

pub const DEFAULT_BIN_SECONDS: i64 = 600;
pub const DEFAULT_WINDOW_SECONDS: i64 = 3600;
pub const DEFAULT_ON_THRESHOLD: f64 = 15.0;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("{timestamps} timestamps but {values} values")]
    LengthMismatch { timestamps: usize, values: usize },
    #[error("timestamp at sample {0} does not increase")]
    NonMonotonicTimestamp(usize),
    #[error("negative power at sample {0}")]
    NegativePower(usize),
    #[error("non-finite power at sample {0}")]
    NonFinite(usize),
    #[error("household has no appliances")]
    NoAppliances,
    #[error("appliance name {0:?} appears twice")]
    DuplicateName(String),
    #[error("traces are not on a common grid: {0}")]
    GridMismatch(String),
    #[error("window of {window_seconds} s is not a positive multiple of the {bin_seconds} s bin")]
    InvalidWindow { window_seconds: i64, bin_seconds: i64 },
    #[error("need at least two windows with a nonempty test part, have {0}")]
    TooFewWindows(usize),
    #[error("train fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Active-power samples in watts at strictly increasing epoch seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    timestamps: Vec<i64>,
    values: Vec<f64>,
}

impl PowerTrace {
    pub fn new(timestamps: Vec<i64>, values: Vec<f64>) -> Result<Self, DatasetError> {
        if timestamps.len() != values.len() {
            return Err(DatasetError::LengthMismatch { timestamps: timestamps.len(), values: values.len() });
        }
        if timestamps.is_empty() {
            return Err(DatasetError::EmptyTrace);
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DatasetError::NonMonotonicTimestamp(i + 1));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DatasetError::NonFinite(i));
            }
            if *v < 0.0 {
                return Err(DatasetError::NegativePower(i));
            }
        }
        Ok(PowerTrace { timestamps, values })
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Aggregate meter trace plus one submetered trace per appliance.
#[derive(Debug, Clone, PartialEq)]
pub struct Household {
    pub aggregate: PowerTrace,
    pub appliances: Vec<PowerTrace>,
    pub appliance_names: Vec<String>,
}

impl Household {
    pub fn new(aggregate: PowerTrace, appliances: Vec<PowerTrace>, appliance_names: Vec<String>) -> Result<Self, DatasetError> {
        if appliances.is_empty() {
            return Err(DatasetError::NoAppliances);
        }
        if appliances.len() != appliance_names.len() {
            return Err(DatasetError::InvalidConfig("one name per appliance trace is required"));
        }
        for (i, name) in appliance_names.iter().enumerate() {
            if appliance_names[..i].contains(name) {
                return Err(DatasetError::DuplicateName(name.clone()));
            }
        }
        Ok(Household { aggregate, appliances, appliance_names })
    }

    pub fn num_appliances(&self) -> usize {
        self.appliances.len()
    }

    /// Resamples every trace to `bin_seconds` means.
    pub fn resample(&self, bin_seconds: i64) -> Result<ResampledHousehold, DatasetError> {
        Ok(ResampledHousehold {
            aggregate: resample_mean(&self.aggregate, bin_seconds)?,
            appliances: self.appliances.iter().map(|t| resample_mean(t, bin_seconds)).collect::<Result<_, _>>()?,
            appliance_names: self.appliance_names.clone(),
        })
    }
}

/// A trace on a regular grid; `None` marks bins without raw samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedTrace {
    pub start: i64,
    pub bin_seconds: i64,
    pub values: Vec<Option<f64>>,
}

impl BinnedTrace {
    pub fn bin_start(&self, i: usize) -> i64 {
        self.start + i as i64 * self.bin_seconds
    }

    pub fn missing_bins(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Drops missing bins and stamps each value with its bin start.
    pub fn to_power_trace(&self) -> Result<PowerTrace, DatasetError> {
        let (ts, vs) = self
            .values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (self.bin_start(i), v)))
            .unzip();
        PowerTrace::new(ts, vs)
    }
}

/// Arithmetic mean of the raw samples in each `[start, start + bin_seconds)`.
///
/// The grid starts at the first timestamp rounded down to a whole bin.
pub fn resample_mean(trace: &PowerTrace, bin_seconds: i64) -> Result<BinnedTrace, DatasetError> {
    if bin_seconds <= 0 {
        return Err(DatasetError::InvalidConfig("bin_seconds must be positive"));
    }
    let first = trace.timestamps[0];
    let last = trace.timestamps[trace.len() - 1];
    let start = first.div_euclid(bin_seconds) * bin_seconds;
    let bins = ((last - start) / bin_seconds + 1) as usize;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (&t, &v) in trace.timestamps.iter().zip(&trace.values) {
        let b = ((t - start) / bin_seconds) as usize;
        sums[b] += v;
        counts[b] += 1;
    }
    let values = sums.iter().zip(&counts).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect();
    Ok(BinnedTrace { start, bin_seconds, values })
}

/// A household after resampling; all traces are expected on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledHousehold {
    pub aggregate: BinnedTrace,
    pub appliances: Vec<BinnedTrace>,
    pub appliance_names: Vec<String>,
}

/// Hourly windows of aggregate features with appliance ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub appliance_names: Vec<String>,
    pub bin_seconds: i64,
    pub window_seconds: i64,
    pub on_threshold: f64,
    pub window_starts: Vec<i64>,
    /// One row per window: the aggregate bin means.
    pub features: Vec<Vec<f64>>,
    pub labels: LabelMatrix,
    /// Mean power of each appliance over each window (windows × N), watts.
    pub appliance_power: Vec<Vec<f64>>,
    /// Per appliance, mean window power over its ON windows (0 if never ON).
    pub mean_on_power: Vec<f64>,
    /// Per appliance, ground-truth energy over all windows, watt-hours.
    pub actual_energy: Vec<f64>,
    /// Windows dropped for missing bins while windowing the source household.
    pub dropped_windows: usize,
}

impl WindowedDataset {
    pub fn num_windows(&self) -> usize {
        self.features.len()
    }

    pub fn num_appliances(&self) -> usize {
        self.appliance_names.len()
    }

    pub fn feature_len(&self) -> usize {
        (self.window_seconds / self.bin_seconds) as usize
    }

    pub fn window_hours(&self) -> f64 {
        self.window_seconds as f64 / 3600.0
    }

    pub fn label_sets(&self) -> Vec<LabelSet> {
        (0..self.num_windows()).map(|w| self.labels.row_set(w)).collect()
    }

    /// Feature rows concatenated in window order.
    pub fn unwindowize(&self) -> Vec<f64> {
        self.features.concat()
    }

    /// Windows in `range`, with `mean_on_power` and `actual_energy`
    /// recomputed from those windows alone.
    pub fn subset(&self, range: core::ops::Range<usize>) -> WindowedDataset {
        let labels = self.labels.slice_rows(range.clone());
        let appliance_power = self.appliance_power[range.clone()].to_vec();
        let (mean_on_power, actual_energy) = window_statistics(&labels, &appliance_power, self.window_hours());
        WindowedDataset {
            appliance_names: self.appliance_names.clone(),
            bin_seconds: self.bin_seconds,
            window_seconds: self.window_seconds,
            on_threshold: self.on_threshold,
            window_starts: self.window_starts[range.clone()].to_vec(),
            features: self.features[range].to_vec(),
            labels,
            appliance_power,
            mean_on_power,
            actual_energy,
            dropped_windows: self.dropped_windows,
        }
    }
}

fn window_statistics(labels: &LabelMatrix, power: &[Vec<f64>], window_hours: f64) -> (Vec<f64>, Vec<f64>) {
    let n = labels.cols();
    let mut on_sum = vec![0.0; n];
    let mut on_count = vec![0usize; n];
    let mut energy = vec![0.0; n];
    for (w, row) in power.iter().enumerate() {
        for i in 0..n {
            energy[i] += row[i] * window_hours;
            if labels.get(w, i) {
                on_sum[i] += row[i];
                on_count[i] += 1;
            }
        }
    }
    let mean_on = on_sum.iter().zip(&on_count).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
    (mean_on, energy)
}

/// Cuts the resampled household into consecutive windows of
/// `window_seconds`, starting at the grid origin.
///
/// Windows touching a missing bin in any trace are dropped and counted; a
/// trailing partial window is ignored.
pub fn windowize(house: &ResampledHousehold, window_seconds: i64, on_threshold: f64) -> Result<WindowedDataset, DatasetError> {
    let agg = &house.aggregate;
    let bin = agg.bin_seconds;
    if window_seconds <= 0 || window_seconds % bin != 0 {
        return Err(DatasetError::InvalidWindow { window_seconds, bin_seconds: bin });
    }
    if !(on_threshold.is_finite() && on_threshold >= 0.0) {
        return Err(DatasetError::InvalidConfig("on_threshold must be finite and nonnegative"));
    }
    if house.appliances.is_empty() {
        return Err(DatasetError::NoAppliances);
    }
    for (name, t) in house.appliance_names.iter().zip(&house.appliances) {
        if t.bin_seconds != bin || t.start != agg.start || t.values.len() != agg.values.len() {
            return Err(DatasetError::GridMismatch(format!(
                "appliance {name:?} has grid (start {}, bin {} s, {} bins), aggregate has (start {}, bin {} s, {} bins)",
                t.start,
                t.bin_seconds,
                t.values.len(),
                agg.start,
                bin,
                agg.values.len()
            )));
        }
    }

    let per_window = (window_seconds / bin) as usize;
    let n = house.appliances.len();
    let window_hours = window_seconds as f64 / 3600.0;
    let mut window_starts = Vec::new();
    let mut features = Vec::new();
    let mut appliance_power = Vec::new();
    let mut label_rows: Vec<LabelSet> = Vec::new();
    let mut dropped = 0;

    for w in 0..agg.values.len() / per_window {
        let bins = w * per_window..(w + 1) * per_window;
        let complete = agg.values[bins.clone()].iter().all(Option::is_some)
            && house.appliances.iter().all(|t| t.values[bins.clone()].iter().all(Option::is_some));
        if !complete {
            dropped += 1;
            continue;
        }
        let row: Vec<f64> = agg.values[bins.clone()].iter().map(|v| v.unwrap_or_default()).collect();
        let power: Vec<f64> = house
            .appliances
            .iter()
            .map(|t| t.values[bins.clone()].iter().map(|v| v.unwrap_or_default()).sum::<f64>() / per_window as f64)
            .collect();
        label_rows.push(power.iter().enumerate().filter(|(_, p)| **p > on_threshold).map(|(i, _)| i).collect());
        window_starts.push(agg.bin_start(bins.start));
        features.push(row);
        appliance_power.push(power);
    }

    let labels = LabelMatrix::from_sets(&label_rows, n);
    let (mean_on_power, actual_energy) = window_statistics(&labels, &appliance_power, window_hours);
    Ok(WindowedDataset {
        appliance_names: house.appliance_names.clone(),
        bin_seconds: bin,
        window_seconds,
        on_threshold,
        window_starts,
        features,
        labels,
        appliance_power,
        mean_on_power,
        actual_energy,
        dropped_windows: dropped,
    })
}

/// Number of training windows for `fraction` of `windows`: `⌈fraction · W⌉`.
///
/// The product is nudged down by a relative 1e-12 first so that products
/// like `0.1 · 30 = 3.0000000000000004` do not round up to an extra window.
pub fn train_count(windows: usize, fraction: f64) -> usize {
    libm::ceil(fraction * windows as f64 * (1.0 - 1e-12)) as usize
}

/// The first `⌈fraction · W⌉` windows train, the rest test. Windows are
/// assumed ordered by start time, as [`windowize`] produces them.
pub fn chronological_split(ds: &WindowedDataset, train_fraction: f64) -> Result<(WindowedDataset, WindowedDataset), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let w = ds.num_windows();
    if w < 2 {
        return Err(DatasetError::TooFewWindows(w));
    }
    let n_train = train_count(w, train_fraction);
    if n_train >= w {
        return Err(DatasetError::TooFewWindows(w));
    }
    Ok((ds.subset(0..n_train), ds.subset(n_train..w)))
}

/// Parameters of the two-state Markov household generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub appliance_names: Vec<String>,
    /// ON power of each appliance, watts.
    pub rated_powers: Vec<f64>,
    /// Probability of staying ON for another step, per appliance.
    pub p_on_stay: Vec<f64>,
    /// Probability of staying OFF for another step, per appliance.
    pub p_off_stay: Vec<f64>,
    pub noise_std: f64,
    pub duration_hours: usize,
    pub seed: u64,
    pub step_seconds: i64,
    pub start_timestamp: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::new(vec![100.0, 200.0, 400.0, 800.0, 1600.0], 0.9, 0.9)
    }
}

impl SynthConfig {
    /// Appliances `appliance_0..` with the given powers and shared stay
    /// probabilities; 1 W noise, 600 hours, seed 42, 10-minute steps.
    pub fn new(rated_powers: Vec<f64>, p_on_stay: f64, p_off_stay: f64) -> Self {
        let n = rated_powers.len();
        SynthConfig {
            appliance_names: (0..n).map(|i| format!("appliance_{i}")).collect(),
            rated_powers,
            p_on_stay: vec![p_on_stay; n],
            p_off_stay: vec![p_off_stay; n],
            noise_std: 1.0,
            duration_hours: 600,
            seed: 42,
            step_seconds: DEFAULT_BIN_SECONDS,
            start_timestamp: 1_577_836_800,
        }
    }

    pub fn num_appliances(&self) -> usize {
        self.rated_powers.len()
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let n = self.num_appliances();
        if n == 0 {
            return Err(DatasetError::NoAppliances);
        }
        if self.p_on_stay.len() != n || self.p_off_stay.len() != n || self.appliance_names.len() != n {
            return Err(DatasetError::InvalidConfig("names, powers and transition probabilities need one entry per appliance"));
        }
        if self.rated_powers.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(DatasetError::InvalidConfig("rated powers must be positive"));
        }
        if self.p_on_stay.iter().chain(&self.p_off_stay).any(|p| !(0.0..=1.0).contains(p)) {
            return Err(DatasetError::InvalidConfig("transition probabilities must lie in [0, 1]"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(DatasetError::InvalidConfig("noise_std must be finite and nonnegative"));
        }
        if self.duration_hours == 0 {
            return Err(DatasetError::InvalidConfig("duration_hours must be positive"));
        }
        if self.step_seconds <= 0 || 3600 % self.step_seconds != 0 {
            return Err(DatasetError::InvalidConfig("step_seconds must divide one hour"));
        }
        Ok(())
    }
}

/// Generates a household in which every appliance follows its own ON/OFF
/// Markov chain, sampled every `step_seconds`.
///
/// Each chain starts from its stationary distribution. Appliance readings are
/// rated power while ON plus Gaussian noise, clamped at zero; the aggregate is
/// the sum of appliance readings plus independent noise, also clamped.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Household, DatasetError> {
    cfg.validate()?;
    let n = cfg.num_appliances();
    let steps = cfg.duration_hours * (3600 / cfg.step_seconds) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std).map_err(|_| DatasetError::InvalidConfig("noise_std"))?;

    let mut state: Vec<bool> = (0..n)
        .map(|i| {
            let leave_on = 1.0 - cfg.p_on_stay[i];
            let leave_off = 1.0 - cfg.p_off_stay[i];
            let p_on = if leave_on + leave_off > 0.0 { leave_off / (leave_on + leave_off) } else { 0.5 };
            rng.random::<f64>() < p_on
        })
        .collect();

    let timestamps: Vec<i64> = (0..steps).map(|t| cfg.start_timestamp + t as i64 * cfg.step_seconds).collect();
    let mut appliance_values = vec![Vec::with_capacity(steps); n];
    let mut aggregate = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut total = 0.0;
        for i in 0..n {
            let on_power = if state[i] { cfg.rated_powers[i] } else { 0.0 };
            let v = clamp_nonnegative(on_power + noise.sample(&mut rng));
            appliance_values[i].push(v);
            total += v;
            let stay = if state[i] { cfg.p_on_stay[i] } else { cfg.p_off_stay[i] };
            if rng.random::<f64>() >= stay {
                state[i] = !state[i];
            }
        }
        aggregate.push(clamp_nonnegative(total + noise.sample(&mut rng)));
    }

    let appliances = appliance_values
        .into_iter()
        .map(|v| PowerTrace::new(timestamps.clone(), v))
        .collect::<Result<Vec<_>, _>>()?;
    Household::new(PowerTrace::new(timestamps, aggregate)?, appliances, cfg.appliance_names.clone())
}

// also maps -0.0 to 0.0
fn clamp_nonnegative(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}
