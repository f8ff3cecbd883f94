//! Experiment runner, result files and performance profiles for the
//! `oaccel` solvers.
//!
//! A run is keyed by `(problem, n, run index)`; its seed is derived from the
//! master seed so any record can be regenerated on its own. All solvers of
//! a run see the same instance and start point.

mod error;
pub mod experiment;
pub mod output;

pub use error::BenchError;
pub use experiment::{run_experiment, ExperimentConfig, FStar, Outcome, RunRecord};
pub use output::{
    emit_results, profile_from_records, read_records, summary_json, write_profile, write_records, ProfileReport,
};
