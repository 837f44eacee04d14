//! Experiment plumbing: configuration, seeding, run directories and the
//! command-line front end.

pub mod cli;
mod config;
mod manifest;
mod run;
mod seeds;

pub use config::{ExperimentConfig, Override, RunConfig};
pub use manifest::{RunManifest, RunStatus, MANIFEST_FILE};
pub use run::{
    compare_runs, distance_matrix, gen_levels, level_pair_distance, read_eval_csv, train, write_eval_csv,
    ComparisonRow, TrainSummary,
};
pub use seeds::{seed_streams, SeedStreams, Stream};
