//! Config-driven experiment runner behind the `qsann` binary: training over
//! a seed list, evaluation, attention export and noise sweeps. Every command
//! is an ordinary function so scripts and tests can call it directly.

pub mod checkpoint;
mod commands;
pub mod config;

pub use checkpoint::{Checkpoint, ModelHeader, TrainedModel, CHECKPOINT_SCHEMA_VERSION};
pub use commands::{
    cmd_attention, cmd_eval, cmd_noise_sweep, cmd_train, cmd_train_file, load_dataset, print_json,
    run_seeds, seed_dir, summarize, AccuracyStats, AttentionExport, AttentionIndex, EvalReport,
    NoiseSweepEntry, NoiseSweepSummary, SampleSource, SeedResult, SeedRun, Split, TrainSummary,
    CHECKPOINT_FILE, CONFIG_FILE, MANIFEST_FILE, METRICS_FILE, REPORT_SCHEMA_VERSION, SUMMARY_FILE,
};
pub use config::{
    ArchitectureConfig, DatasetConfig, DatasetFormat, ModelKind, Overrides, RunConfig,
    OUTPUT_ROOT_ENV,
};
