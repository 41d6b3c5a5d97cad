//! Experiment drivers: sampling, presets, training, and evaluation.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`preset::ExperimentPreset::ground_truth`] solves the reference
//!    finite-volume problem.
//! 2. [`preset::ExperimentPreset::build`] draws the observation and
//!    collocation pools from it, splits off validation fifths where
//!    configured, and assembles the trainable loss.
//! 3. [`train::train`] runs full-batch Adam with threshold, patience, and
//!    epoch-cap stopping, recording every loss part per epoch.
//! 4. [`eval::evaluate`] scores the trained network against the reference
//!    lattice, per field and per time horizon, and reports learned physical
//!    parameters against their true values.
//!
//! Everything downstream of a seed is deterministic, so a preset name plus
//! a seed fully identifies a run.

mod eval;
mod preset;
mod sampling;
mod train;

pub use eval::{evaluate, predict_field, rel_errors_where, relative_error, EvalMetrics, LearnableError};
pub use preset::{find_preset, preset_catalog, ExperimentPreset, ModelKind, ObservedFields, Physics};
pub use sampling::{
    sample_lattice_points, sample_residual_points, split_validation, DataStrategy, LatticeSample,
    ResidualStrategy,
};
pub use train::{smoothed_training_loss, train, EpochRecord, TrainedModel};
