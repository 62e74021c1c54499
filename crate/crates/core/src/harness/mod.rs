//! Experiment configuration, training and evaluation orchestration, result
//! tables, merged learning curves, and the invariant suites run by `check`.

pub mod checks;
mod config;
mod curves;
mod eval;
mod metrics;
mod run;
mod table;

use std::path::Path;

use thiserror::Error;

pub use config::{load_config, EvalConfig, ExperimentConfig, Method, OutputConfig};
pub use curves::{average_runs, emit_progress_curves, merge_curves};
pub use eval::{eval_env_config, eval_episode_seed, evaluate_agent, run_episode, run_eval, Agent};
pub use metrics::{
    mean_std, read_summary, read_trials, summary_csv, trials_csv, write_summary, write_trials, ClassSummary,
    MetricsSummary, TrialRecord, SUMMARY_HEADER, TRIALS_HEADER,
};
pub use run::{
    bench, bench_methods, train_method, BenchReport, TrainArtifacts, CHECKPOINT_FILE, CURVES_FILE, SUMMARY_FILE,
    TRIALS_FILE,
};
pub use table::{emit_results_table, ResultsTable, METRICS, MISSING};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Malformed or invalid configuration.
    #[error("config error: {0}")]
    Config(String),
    /// Bad user input other than the config: missing files, mismatches.
    #[error("{0}")]
    Input(String),
    /// Failure inside training, evaluation, or output writing.
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Internal(format!("{}: {e}", path.display()))
    }

    /// Process exit code: 1 for user errors, 2 for internal faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Input(_) => 1,
            HarnessError::Internal(_) => 2,
        }
    }
}
