//! The training loop: episode collection, interval-triggered critic and
//! actor updates, target synchronisation, evaluation and multi-trial runs.

mod buffer;
mod config;
mod experiment;
mod learner;
mod run;

pub use buffer::{Episode, EpisodeBuffer, Transition};
pub use config::{Algorithm, CheckpointKeep, ExperimentConfig, CONFIG_KEYS};
pub use experiment::{
    aggregate, export_runs, final_returns, read_trial_csv, run_experiment, trial_csv_name,
    AggregateRow, ExperimentSummary, ExportRow, Manifest, RunOptions, TrialRecord,
    AGGREGATE_FILE, MANIFEST_FILE, SMOOTHING_WINDOW,
};
pub use learner::{Learner, PassLosses};
pub use run::{
    build_env, collect_episode, evaluate, evaluate_checkpoint, run_trial, run_trial_observed, run_trial_with,
    stream_rng, CheckpointMeta, MetricsRow, Progress, Stream, TrialOutcome, TrialSink,
};
