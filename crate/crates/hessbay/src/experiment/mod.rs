//! Experiment runner behind the `hessbay` CLI.
//!
//! An [`ExperimentConfig`] (usually loaded from TOML) names a problem, a
//! set of methods, seeds, and a gradient budget; [`run_experiment`] executes
//! every `(method, seed)` combination in a worker pool and writes per-run
//! trace CSVs, per-run solver-diagnostics CSVs, and a summary CSV. Outputs
//! are deterministic for a fixed config, except for the wall-time columns.

mod config;
mod csvio;
mod runner;

pub use config::{
    ConfigError, EstimatorSpec, ExperimentConfig, Method, PairsSpec, PolicySpec, ProblemSpec,
    ScheduleSpec, SolverOverrides,
};
pub use csvio::{
    emit_map_diag, emit_summary, emit_trace, fmt_float, parse_trace, SummaryRow, TraceParseError,
    MAP_DIAG_HEADER, SUMMARY_HEADER, TRACE_HEADER,
};
pub use runner::{map_diag_path, run_experiment, trace_path, ExpError, RunArtifacts, Summary};
