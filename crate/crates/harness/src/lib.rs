//! Configuration, experiment runs, convergence sweeps and result files
//! for the `union-laplacian` library.

pub mod config;
pub mod error;
pub mod run;
pub mod sweep;

pub use config::{Bandwidth, ExperimentConfig, ModelSource, EXPERIMENT_PRESETS};
pub use error::{HarnessError, Result, Stage};
pub use run::{
    reference_for, run_experiment, run_once, validate_bundle, write_outcome, Draw, ResultBundle, RunOutcome,
};
pub use sweep::{convergence_sweep, median, write_sweep_csv, SweepRow};
