//! Library side of the `rbx` binary: config loading, dataset ingestion and
//! the subcommand reports.

pub mod commands;
pub mod config;
pub mod ingest;

pub use commands::{
    cmd_analyze, cmd_extend, cmd_simulate, cmd_sweep, cmd_verify, AnalyzeReport, ExtendReport,
    PlotTable, SimulateReport, SweepReport, VerifyReport,
};
pub use config::{LossSpec, Resolved, RunConfig};
pub use ingest::{ingest_dataset, Format, IngestOptions};

/// Value of the `schema_version` field in every report.
pub const SCHEMA_VERSION: &str = "1";
