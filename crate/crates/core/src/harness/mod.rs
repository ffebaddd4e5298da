//! Seeded experiment runner: per-trial graph, endpoints and target path,
//! every configured algorithm on identical inputs, CSV output.

mod config;
mod run;
mod stats;

pub use config::{ExperimentConfig, GraphSource, Selection};
pub use run::{
    run_experiment, select_endpoints, select_target_path, trial_rng, Endpoints, ExperimentOutput, Pick, HOP_ATTEMPTS,
};
pub use stats::{
    max_summary_diff, mean_and_se, read_skipped_csv, read_summary_csv, summarize, write_skipped_csv,
    write_summary_csv, SkipRecord, SummaryStats,
};
