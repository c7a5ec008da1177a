//! Multi-label sparse representation classification.
//!
//! A test window `y` is coded once over the whole training dictionary. For
//! each appliance class `k` the code is restricted to the columns whose label
//! set contains `k`, and `d_k = ‖y − V_k α_k‖₂`. Every trained class with
//! `d_k ≤ τ · min d` is predicted ON.
//!
//! Training windows carrying several labels belong to every matching class;
//! the code is solved over unique columns, never duplicated ones. Windows with
//! no label stay in the dictionary but belong to no class.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::labels::LabelSet;
use crate::linalg::{self, Matrix};
use crate::solver::{self, normalize_columns, DesignMatrix, SolverConfig, SolverError, SparseCode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training window {0} is all zeros")]
    ZeroColumn(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{windows} training windows but {labels} label sets")]
    LabelCountMismatch { windows: usize, labels: usize },
    #[error("window {window} carries label {id} but only {num_classes} classes exist")]
    LabelOutOfRange { window: usize, id: usize, num_classes: usize },
    #[error("no class has any training column")]
    NoTrainedClasses,
    #[error("invalid classifier configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("row {row}: {source}")]
    InRow {
        row: usize,
        #[source]
        source: Box<ClassifierError>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl ClassifierError {
    /// The error with any row context stripped.
    pub fn root(&self) -> &ClassifierError {
        match self {
            ClassifierError::InRow { source, .. } => source.root(),
            e => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    /// Classes within `tau × min d_k` are predicted. Must be `>= 1`.
    pub tau: f64,
    /// Windows with `‖y‖₂` at or below this many watts predict no appliance.
    pub vacancy_norm_threshold: f64,
    pub solver: SolverConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { tau: 2.0, vacancy_norm_threshold: 0.0, solver: SolverConfig::default() }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.tau.is_finite() && self.tau >= 1.0) {
            return Err(ClassifierError::InvalidConfig("tau must be finite and >= 1"));
        }
        if !(self.vacancy_norm_threshold.is_finite() && self.vacancy_norm_threshold >= 0.0) {
            return Err(ClassifierError::InvalidConfig("vacancy_norm_threshold must be finite and >= 0"));
        }
        self.solver.validate()?;
        Ok(())
    }
}

/// Per-class residuals for one test window.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub distances: Vec<f64>,
    pub min_distance: f64,
    pub sparse_code: SparseCode,
}

/// Normalized training windows with their label sets, partitioned by class.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDictionary {
    design: DesignMatrix,
    column_labels: Vec<LabelSet>,
    class_columns: Vec<Vec<usize>>,
    num_classes: usize,
}

impl TrainingDictionary {
    /// Builds the dictionary from training windows (one slice per window) and
    /// their label sets.
    pub fn fit<W: AsRef<[f64]>>(
        windows: &[W],
        labels: &[LabelSet],
        num_classes: usize,
    ) -> Result<Self, ClassifierError> {
        if windows.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        if windows.len() != labels.len() {
            return Err(ClassifierError::LabelCountMismatch { windows: windows.len(), labels: labels.len() });
        }
        let raw = Matrix::from_columns(windows).map_err(|e| match e {
            SolverError::DimensionMismatch { expected, found } => ClassifierError::DimensionMismatch { expected, found },
            e => e.into(),
        })?;
        let design = normalize_columns(&raw).map_err(|e| match e {
            SolverError::ZeroColumn(j) => ClassifierError::ZeroColumn(j),
            e => e.into(),
        })?;
        Self::from_parts(design, labels.to_vec(), num_classes)
    }

    /// Reassembles a dictionary from a normalized design matrix and per-column
    /// labels, rebuilding the class partition.
    pub fn from_parts(
        design: DesignMatrix,
        column_labels: Vec<LabelSet>,
        num_classes: usize,
    ) -> Result<Self, ClassifierError> {
        if column_labels.len() != design.cols() {
            return Err(ClassifierError::LabelCountMismatch { windows: design.cols(), labels: column_labels.len() });
        }
        let mut class_columns = vec![Vec::new(); num_classes];
        for (j, set) in column_labels.iter().enumerate() {
            for &id in set.ids() {
                if id >= num_classes {
                    return Err(ClassifierError::LabelOutOfRange { window: j, id, num_classes });
                }
                class_columns[id].push(j);
            }
        }
        Ok(TrainingDictionary { design, column_labels, class_columns, num_classes })
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn column_labels(&self) -> &[LabelSet] {
        &self.column_labels
    }

    pub fn class_columns(&self, class: usize) -> &[usize] {
        &self.class_columns[class]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Length of a feature window.
    pub fn window_len(&self) -> usize {
        self.design.rows()
    }

    /// Classes with no training column. They can never be predicted.
    pub fn empty_classes(&self) -> Vec<usize> {
        (0..self.num_classes).filter(|k| self.class_columns[*k].is_empty()).collect()
    }

    fn check_window(&self, y: &[f64]) -> Result<(), ClassifierError> {
        if y.len() != self.window_len() {
            return Err(ClassifierError::DimensionMismatch { expected: self.window_len(), found: y.len() });
        }
        Ok(())
    }

    /// Solves for the sparse code and returns every class residual `d_k`.
    ///
    /// A class without training columns reconstructs nothing, so its distance
    /// is `‖y‖₂`.
    pub fn distance_profile(&self, y: &[f64], cfg: &ClassifierConfig) -> Result<DistanceProfile, ClassifierError> {
        self.check_window(y)?;
        cfg.validate()?;
        let code = solver::solve(&self.design, y, &cfg.solver)?;

        let mut distances = Vec::with_capacity(self.num_classes);
        let mut min_distance: Option<f64> = None;
        for columns in &self.class_columns {
            let mut residual = y.to_vec();
            for &j in columns {
                let a = code.coefficients[j];
                if a != 0.0 {
                    linalg::axpy(-a, self.design.column(j), &mut residual);
                }
            }
            let d = linalg::norm2(&residual);
            if !columns.is_empty() {
                min_distance = Some(min_distance.map_or(d, |m| m.min(d)));
            }
            distances.push(d);
        }
        let min_distance = min_distance.ok_or(ClassifierError::NoTrainedClasses)?;
        Ok(DistanceProfile { distances, min_distance, sparse_code: code })
    }

    /// Predicts every trained class with `d_k ≤ τ · min d`.
    pub fn predict_one(&self, y: &[f64], cfg: &ClassifierConfig) -> Result<LabelSet, ClassifierError> {
        self.check_window(y)?;
        cfg.validate()?;
        if self.class_columns.iter().all(Vec::is_empty) {
            return Err(ClassifierError::NoTrainedClasses);
        }
        if linalg::norm2(y) <= cfg.vacancy_norm_threshold {
            return Ok(LabelSet::empty());
        }
        let profile = self.distance_profile(y, cfg)?;
        Ok(self.assign(&profile, cfg.tau))
    }

    /// Applies the τ-rule to a precomputed profile.
    pub fn assign(&self, profile: &DistanceProfile, tau: f64) -> LabelSet {
        let cutoff = tau * profile.min_distance;
        (0..self.num_classes)
            .filter(|&k| !self.class_columns[k].is_empty() && profile.distances[k] <= cutoff)
            .collect()
    }

    /// `predict_one` over every row, in order.
    pub fn predict_batch<W: AsRef<[f64]>>(
        &self,
        windows: &[W],
        cfg: &ClassifierConfig,
    ) -> Result<Vec<LabelSet>, ClassifierError> {
        windows
            .iter()
            .enumerate()
            .map(|(row, y)| {
                self.predict_one(y.as_ref(), cfg)
                    .map_err(|e| ClassifierError::InRow { row, source: Box::new(e) })
            })
            .collect()
    }

    /// Same output as [`predict_batch`](Self::predict_batch), with contiguous
    /// chunks of rows handed to `threads` scoped workers.
    #[cfg(feature = "std")]
    pub fn predict_batch_parallel<W: AsRef<[f64]> + Sync>(
        &self,
        windows: &[W],
        cfg: &ClassifierConfig,
        threads: usize,
    ) -> Result<Vec<LabelSet>, ClassifierError> {
        let threads = threads.max(1).min(windows.len().max(1));
        if threads == 1 {
            return self.predict_batch(windows, cfg);
        }
        let chunk = windows.len().div_ceil(threads);
        let parts: Vec<Result<Vec<LabelSet>, ClassifierError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = windows
                .chunks(chunk)
                .enumerate()
                .map(|(c, rows)| {
                    scope.spawn(move || {
                        self.predict_batch(rows, cfg).map_err(|e| match e {
                            ClassifierError::InRow { row, source } => {
                                ClassifierError::InRow { row: row + c * chunk, source }
                            }
                            e => e,
                        })
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("prediction worker panicked")).collect()
        });
        let mut out = Vec::with_capacity(windows.len());
        for part in parts {
            out.extend(part?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: usize = 0;
    const B: usize = 1;

    fn orthonormal_pair() -> TrainingDictionary {
        TrainingDictionary::fit(&[[1.0, 0.0], [0.0, 1.0]], &[LabelSet::from_ids([A]), LabelSet::from_ids([B])], 2)
            .unwrap()
    }

    #[test]
    fn fit_partitions_columns() {
        let dict = orthonormal_pair();
        assert_eq!(dict.class_columns(A), &[0]);
        assert_eq!(dict.class_columns(B), &[1]);
        assert!(dict.empty_classes().is_empty());
    }

    #[test]
    fn multi_label_column_joins_every_class() {
        let dict = TrainingDictionary::fit(&[[2.0, 1.0]], &[LabelSet::from_ids([A, B])], 2).unwrap();
        assert_eq!(dict.class_columns(A), &[0]);
        assert_eq!(dict.class_columns(B), &[0]);
    }

    #[test]
    fn unlabeled_column_joins_no_class() {
        let dict = TrainingDictionary::fit(&[[2.0, 1.0], [1.0, 1.0]], &[LabelSet::empty(), LabelSet::from_ids([B])], 3)
            .unwrap();
        assert!(dict.class_columns(A).is_empty());
        assert_eq!(dict.class_columns(B), &[1]);
        assert_eq!(dict.empty_classes(), vec![0, 2]);
    }

    #[test]
    fn fit_errors() {
        let none: [[f64; 2]; 0] = [];
        assert_eq!(TrainingDictionary::fit(&none, &[], 1), Err(ClassifierError::EmptyTrainingSet));
        assert_eq!(
            TrainingDictionary::fit(&[[1.0, 0.0], [0.0, 0.0]], &[LabelSet::empty(), LabelSet::empty()], 1),
            Err(ClassifierError::ZeroColumn(1))
        );
        assert!(matches!(
            TrainingDictionary::fit(&[[1.0, 0.0]], &[LabelSet::from_ids([4])], 2),
            Err(ClassifierError::LabelOutOfRange { id: 4, .. })
        ));
        let ragged: [&[f64]; 2] = [&[1.0, 0.0], &[1.0]];
        assert!(matches!(
            TrainingDictionary::fit(&ragged, &[LabelSet::empty(), LabelSet::empty()], 1),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn profile_on_training_column() {
        let dict = orthonormal_pair();
        let p = dict.distance_profile(&[1.0, 0.0], &ClassifierConfig::default()).unwrap();
        assert!(p.distances[A].abs() < 1e-9);
        assert!((p.distances[B] - 1.0).abs() < 1e-9);
        assert_eq!(dict.predict_one(&[1.0, 0.0], &ClassifierConfig::default()).unwrap(), LabelSet::from_ids([A]));
    }

    #[test]
    fn zero_window_has_zero_distances_and_is_vacant() {
        let dict = orthonormal_pair();
        let p = dict.distance_profile(&[0.0, 0.0], &ClassifierConfig::default()).unwrap();
        assert_eq!(p.distances, vec![0.0, 0.0]);
        assert_eq!(dict.predict_one(&[0.0, 0.0], &ClassifierConfig::default()).unwrap(), LabelSet::empty());
    }

    #[test]
    fn empty_class_distance_is_window_norm() {
        let dict = TrainingDictionary::fit(&[[1.0, 0.0]], &[LabelSet::from_ids([A])], 2).unwrap();
        let p = dict.distance_profile(&[3.0, 4.0], &ClassifierConfig::default()).unwrap();
        assert_eq!(p.distances[B], 5.0);
        // B is never predicted even though tau * min exceeds its distance
        let cfg = ClassifierConfig { tau: 100.0, ..Default::default() };
        assert_eq!(dict.predict_one(&[3.0, 4.0], &cfg).unwrap(), LabelSet::from_ids([A]));
    }

    #[test]
    fn no_trained_classes() {
        let dict = TrainingDictionary::fit(&[[1.0, 0.0]], &[LabelSet::empty()], 2).unwrap();
        assert_eq!(dict.predict_one(&[1.0, 0.0], &ClassifierConfig::default()), Err(ClassifierError::NoTrainedClasses));
    }

    #[test]
    fn vacancy_threshold_suppresses_small_windows() {
        let dict = orthonormal_pair();
        let cfg = ClassifierConfig { vacancy_norm_threshold: 10.0, ..Default::default() };
        assert_eq!(dict.predict_one(&[3.0, 4.0], &cfg).unwrap(), LabelSet::empty());
        assert_eq!(dict.predict_one(&[12.0, 9.0], &cfg).unwrap(), LabelSet::from_ids([A, B]));
    }

    #[test]
    fn config_validation() {
        let dict = orthonormal_pair();
        let cfg = ClassifierConfig { tau: 0.5, ..Default::default() };
        assert!(matches!(dict.predict_one(&[1.0, 0.0], &cfg), Err(ClassifierError::InvalidConfig(_))));
    }

    #[test]
    fn batch_errors_carry_row() {
        let dict = orthonormal_pair();
        let rows: [&[f64]; 2] = [&[1.0, 0.0], &[1.0]];
        let err = dict.predict_batch(&rows, &ClassifierConfig::default()).unwrap_err();
        assert!(matches!(err, ClassifierError::InRow { row: 1, .. }));
        assert!(matches!(err.root(), ClassifierError::DimensionMismatch { .. }));
    }

    #[test]
    fn empty_and_singleton_batches() {
        let dict = orthonormal_pair();
        let cfg = ClassifierConfig::default();
        let none: [[f64; 2]; 0] = [];
        assert!(dict.predict_batch(&none, &cfg).unwrap().is_empty());
        assert_eq!(dict.predict_batch(&[[0.2, 0.9]], &cfg).unwrap(), vec![dict.predict_one(&[0.2, 0.9], &cfg).unwrap()]);
    }
}
