//! Experiment harness: JSON configuration, the ε sweep, verification
//! suites, Besov utilities and run-directory summaries.

mod config;
mod sweep;
mod tools;
mod verify;

pub use config::{ExperimentConfig, ParamsSpec};
pub use sweep::{
    sweep_epsilon, write_scaling_csv, write_sweep, Horizon, ScalingRow, ScalingTable, SweepOutcome, SweepSpec,
    DEFAULT_LADDER, SCALING_HEADER,
};
pub use tools::{besov_of_snapshot, report, write_run, FieldNorm, RunSummary};
pub use verify::{verify, Check, Comparison, VerifyOptions, VerifyReport, SUITES};
