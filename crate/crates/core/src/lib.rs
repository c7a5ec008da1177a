//! Multi-label sparse representation classification for non-intrusive load
//! monitoring.
//!
//! An aggregate smart-meter window is coded sparsely over a dictionary of
//! training windows; every appliance class whose class-restricted residual is
//! within `tau` times the smallest residual is predicted ON.
//!
//! The crate is `no_std` + `alloc`. The `std` feature adds a thread-parallel
//! batch predictor and nothing else; file formats and the command line live in
//! the `sparsenilm` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classifier;
pub mod dataset;
pub mod labels;
pub mod linalg;
pub mod metrics;
pub mod solver;

pub use classifier::{ClassifierConfig, ClassifierError, DistanceProfile, TrainingDictionary};
pub use dataset::{
    chronological_split, resample_mean, synth_generate, windowize, BinnedTrace, DatasetError,
    Household, PowerTrace, ResampledHousehold, SynthConfig, WindowedDataset,
};
pub use labels::{LabelMatrix, LabelSet};
pub use linalg::Matrix;
pub use metrics::{EvaluationReport, MetricsError};
pub use solver::{DesignMatrix, Method, SolverConfig, SolverError, SparseCode};
