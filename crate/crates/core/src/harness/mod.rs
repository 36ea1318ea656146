//! Experiment configuration, file formats and end-to-end protocols.

mod check;
mod compare;
mod config;
pub mod formats;
mod pipeline;
pub mod stats;
mod sweep;

pub use check::{run_checks, write_checks, CheckReport};
pub use compare::{linkage_csv, run_linkage_comparison, write_linkage_comparison, LinkageRow};
pub use config::{
    DataConfig, EmbeddingConfig, EvalConfig, ExperimentConfig, GeneratorConfig, MetricKind, OutputConfig, RescaleStep,
    SweepConfig,
};
pub use pipeline::{
    evaluate_tree, load_data, prepare, run_pipeline, runs_csv, write_pipeline, PipelineReport, Prepared, RunRecord,
    Summary,
};
pub use sweep::{recovery_trial, run_recovery_sweep, sweep_csv, write_sweep, SweepRow};
