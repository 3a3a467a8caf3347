//! JSON experiment configs, eps sweeps comparing effective and full
//! spectra, and the persisted CSV/JSON outputs behind the `wgspec` CLI.

mod config;
mod run;
mod tools;

pub use config::{
    CurveConfig, ExperimentConfig, FiberConfig, FiberKindConfig, FiberMoments, GridConfig, OracleConfig,
    ReferenceChoice, Tolerances,
};
pub use run::{
    distances_csv, eigen_csv, read_distances_csv, run_experiment, window_distance, write_outputs, DistanceRow,
    EigenTable, Prepared, RunRecord, SlopeRow, FULL,
};
pub use tools::{dump_operator, oracle_lambda02, validate_config, Diagnostic, DumpFiles, Level, OracleReport, ORACLE_TOL};
