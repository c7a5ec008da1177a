//! Multi-label evaluation: per-label confusion counts, F1, micro and macro
//! F1, and average energy error (AEE).
//!
//! Estimated energy of appliance `i` is the number of test windows predicted
//! ON times the window length in hours times the train-side mean ON power.
//! AEE is `|Σ estimated − Σ actual| / Σ actual`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::WindowedDataset;
use crate::labels::LabelMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("total actual energy is zero; energy error is undefined")]
    ZeroActualEnergy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl LabelCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    labels: Vec<LabelCounts>,
    windows: u64,
}

impl ConfusionCounts {
    pub fn from_labels(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<Self, MetricsError> {
        check_shape(pred, truth)?;
        let mut labels = vec![LabelCounts::default(); truth.cols()];
        for w in 0..truth.rows() {
            for (i, c) in labels.iter_mut().enumerate() {
                match (pred.get(w, i), truth.get(w, i)) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                    (false, false) => c.tn += 1,
                }
            }
        }
        Ok(ConfusionCounts { labels, windows: truth.rows() as u64 })
    }

    /// From explicit per-label counts; every label must cover the same number
    /// of windows.
    pub fn from_counts(labels: Vec<LabelCounts>) -> Result<Self, MetricsError> {
        let windows = labels.first().map_or(0, LabelCounts::total);
        if let Some(bad) = labels.iter().find(|c| c.total() != windows) {
            return Err(MetricsError::DimensionMismatch { expected: windows as usize, found: bad.total() as usize });
        }
        Ok(ConfusionCounts { labels, windows })
    }

    pub fn per_label(&self) -> &[LabelCounts] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn windows(&self) -> u64 {
        self.windows
    }

    /// Counts summed over labels.
    pub fn pooled(&self) -> LabelCounts {
        self.labels.iter().fold(LabelCounts::default(), |acc, c| LabelCounts {
            tp: acc.tp + c.tp,
            fp: acc.fp + c.fp,
            fn_: acc.fn_ + c.fn_,
            tn: acc.tn + c.tn,
        })
    }
}

fn check_shape(pred: &LabelMatrix, truth: &LabelMatrix) -> Result<(), MetricsError> {
    if pred.rows() != truth.rows() {
        return Err(MetricsError::DimensionMismatch { expected: truth.rows(), found: pred.rows() });
    }
    if pred.cols() != truth.cols() {
        return Err(MetricsError::DimensionMismatch { expected: truth.cols(), found: pred.cols() });
    }
    Ok(())
}

/// An F1 value; `degenerate` marks `TP = FP = FN = 0`, scored as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Score {
    pub value: f64,
    pub degenerate: bool,
}

/// `2·TP / (2·TP + FP + FN)`
pub fn f1(tp: u64, fp: u64, fn_: u64) -> F1Score {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        return F1Score { value: 0.0, degenerate: true };
    }
    F1Score { value: (2 * tp) as f64 / denom as f64, degenerate: false }
}

pub fn f1_micro(counts: &ConfusionCounts) -> F1Score {
    let p = counts.pooled();
    f1(p.tp, p.fp, p.fn_)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroF1 {
    pub value: f64,
    /// Labels whose F1 was degenerate and contributed 0.
    pub degenerate_labels: Vec<usize>,
}

/// Unweighted mean of per-label F1 over all labels.
pub fn f1_macro(counts: &ConfusionCounts) -> MacroF1 {
    let n = counts.num_labels();
    let mut sum = 0.0;
    let mut degenerate_labels = Vec::new();
    for (i, c) in counts.per_label().iter().enumerate() {
        let s = f1(c.tp, c.fp, c.fn_);
        if s.degenerate {
            degenerate_labels.push(i);
        }
        sum += s.value;
    }
    MacroF1 { value: if n == 0 { 0.0 } else { sum / n as f64 }, degenerate_labels }
}

/// Per appliance: predicted-ON windows × window hours × train mean ON power.
pub fn estimated_energy(pred: &LabelMatrix, window_hours: f64, mean_on_power_train: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if mean_on_power_train.len() != pred.cols() {
        return Err(MetricsError::DimensionMismatch { expected: pred.cols(), found: mean_on_power_train.len() });
    }
    Ok((0..pred.cols())
        .map(|i| pred.count_column(i) as f64 * window_hours * mean_on_power_train[i])
        .collect())
}

pub fn average_energy_error(pred: &LabelMatrix, test: &WindowedDataset, mean_on_power_train: &[f64]) -> Result<f64, MetricsError> {
    check_shape(pred, &test.labels)?;
    let estimated = estimated_energy(pred, test.window_hours(), mean_on_power_train)?;
    relative_energy_error(estimated.iter().sum(), test.actual_energy.iter().sum())
}

fn relative_energy_error(estimated: f64, actual: f64) -> Result<f64, MetricsError> {
    if actual == 0.0 {
        return Err(MetricsError::ZeroActualEnergy);
    }
    Ok(libm::fabs(estimated - actual) / actual)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceReport {
    pub name: String,
    pub f1: F1Score,
    /// `|estimated − actual| / actual`; `None` when the appliance used no
    /// energy in the evaluated span.
    pub energy_error: Option<f64>,
    pub estimated_energy: f64,
    pub actual_energy: f64,
}

pub fn per_appliance_report(
    pred: &LabelMatrix,
    truth: &LabelMatrix,
    names: &[String],
    estimated: &[f64],
    actual: &[f64],
) -> Result<Vec<ApplianceReport>, MetricsError> {
    let counts = ConfusionCounts::from_labels(pred, truth)?;
    let n = truth.cols();
    for len in [names.len(), estimated.len(), actual.len()] {
        if len != n {
            return Err(MetricsError::DimensionMismatch { expected: n, found: len });
        }
    }
    Ok(counts
        .per_label()
        .iter()
        .enumerate()
        .map(|(i, c)| ApplianceReport {
            name: names[i].clone(),
            f1: f1(c.tp, c.fp, c.fn_),
            energy_error: relative_energy_error(estimated[i], actual[i]).ok(),
            estimated_energy: estimated[i],
            actual_energy: actual[i],
        })
        .collect())
}

/// Everything a results table needs.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub f1_macro: MacroF1,
    pub f1_micro: F1Score,
    /// `None` when the test span holds no appliance energy.
    pub aee: Option<f64>,
    pub per_appliance: Vec<ApplianceReport>,
    pub counts: ConfusionCounts,
    /// Resolved settings that produced the report, in a fixed order.
    pub config: Vec<(String, String)>,
}

/// Scores predictions for the test windows against their ground truth.
pub fn evaluate(pred: &LabelMatrix, test: &WindowedDataset, mean_on_power_train: &[f64]) -> Result<EvaluationReport, MetricsError> {
    let counts = ConfusionCounts::from_labels(pred, &test.labels)?;
    let estimated = estimated_energy(pred, test.window_hours(), mean_on_power_train)?;
    let aee = match average_energy_error(pred, test, mean_on_power_train) {
        Ok(v) => Some(v),
        Err(MetricsError::ZeroActualEnergy) => None,
        Err(e) => return Err(e),
    };
    let per_appliance = per_appliance_report(pred, &test.labels, &test.appliance_names, &estimated, &test.actual_energy)?;
    Ok(EvaluationReport {
        f1_macro: f1_macro(&counts),
        f1_micro: f1_micro(&counts),
        aee,
        per_appliance,
        counts,
        config: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::LabelSet;

    fn counts(triples: &[(u64, u64, u64)]) -> ConfusionCounts {
        let total = triples.iter().map(|(a, b, c)| a + b + c).max().unwrap_or(0);
        ConfusionCounts::from_counts(
            triples.iter().map(|&(tp, fp, fn_)| LabelCounts { tp, fp, fn_, tn: total - tp - fp - fn_ }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn f1_examples() {
        assert!((f1(2, 1, 1).value - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f1(5, 0, 0), F1Score { value: 1.0, degenerate: false });
        assert_eq!(f1(0, 0, 0), F1Score { value: 0.0, degenerate: true });
        assert_eq!(f1(0, 1, 1).value, 0.0);
    }

    #[test]
    fn micro_examples() {
        assert!((f1_micro(&counts(&[(2, 1, 1), (2, 1, 1)])).value - 2.0 / 3.0).abs() < 1e-12);
        assert!((f1_micro(&counts(&[(1, 0, 0), (0, 1, 1)])).value - 0.5).abs() < 1e-12);
        assert!(f1_micro(&counts(&[(0, 0, 0), (0, 0, 0)])).degenerate);
    }

    #[test]
    fn macro_examples() {
        // per-label F1 of 1.0 and 0.5
        assert!((f1_macro(&counts(&[(3, 0, 0), (1, 1, 1)])).value - 0.75).abs() < 1e-12);
        assert!((f1_macro(&counts(&[(2, 1, 1)])).value - 2.0 / 3.0).abs() < 1e-12);
        let m = f1_macro(&counts(&[(1, 0, 0), (0, 1, 1)]));
        assert!((m.value - 0.5).abs() < 1e-12);
        let m = f1_macro(&counts(&[(1, 0, 0), (0, 0, 0)]));
        assert_eq!(m.degenerate_labels, vec![1]);
    }

    #[test]
    fn counts_must_agree_on_window_total() {
        let bad = vec![LabelCounts { tp: 1, ..Default::default() }, LabelCounts { tp: 2, ..Default::default() }];
        assert!(ConfusionCounts::from_counts(bad).is_err());
    }

    #[test]
    fn confusion_from_labels() {
        let truth = LabelMatrix::from_sets(&[LabelSet::from_ids([0]), LabelSet::from_ids([0, 1]), LabelSet::empty()], 2);
        let pred = LabelMatrix::from_sets(&[LabelSet::from_ids([0, 1]), LabelSet::from_ids([1]), LabelSet::empty()], 2);
        let c = ConfusionCounts::from_labels(&pred, &truth).unwrap();
        assert_eq!(c.per_label()[0], LabelCounts { tp: 1, fp: 0, fn_: 1, tn: 1 });
        assert_eq!(c.per_label()[1], LabelCounts { tp: 1, fp: 1, fn_: 0, tn: 1 });
        assert_eq!(c.windows(), 3);
    }

    #[test]
    fn relative_error_rules() {
        assert_eq!(relative_energy_error(500.0, 1000.0), Ok(0.5));
        assert_eq!(relative_energy_error(0.0, 1000.0), Ok(1.0));
        assert_eq!(relative_energy_error(1.0, 0.0), Err(MetricsError::ZeroActualEnergy));
    }
}
