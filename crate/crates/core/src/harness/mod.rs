//! Experiment runner: TOML configs, trials and sweeps with per-row error
//! tags, privacy chains, and CSV/SVG reports.

pub mod account;
pub mod config;
mod experiment;
pub mod report;
mod sweep;

pub use account::{AccountChain, AccountStep};
pub use config::{AlgorithmSpec, ExperimentConfig, InstanceSpec, OracleName, OracleSpec, SweepGrid, SweepMode};
pub use experiment::{build_instance, config_hash, load_instance_file, run_experiment, run_trial, RunRecord};
pub use report::{emit_report, fit_line, read_records, svg_scatter, write_records, ReportKind, XAxis};
pub use sweep::sweep;
