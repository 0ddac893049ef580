//! Batch front end: configs, runs, JSON-lines records and CSV tables.

pub mod config;
pub mod plot;
pub mod records;
pub mod run;

pub use config::{config_hash, load_config, parse_config, ExperimentConfig, ExperimentKind, PotentialSpec};
pub use plot::emit_plot_data;
pub use records::{read_records, RecordHeader, RecordSink, Status};
pub use run::{run_experiment, RunError, RunSummary};
