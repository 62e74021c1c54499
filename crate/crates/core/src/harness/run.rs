use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Method};
use super::curves::{average_runs, emit_progress_curves};
use super::eval::{evaluate_agent, Agent};
use super::metrics::{write_summary, write_trials, MetricsSummary, TrialRecord};
use super::table::{emit_results_table, ResultsTable};
use super::HarnessError;
use crate::baselines::{train_dqn, train_tabular, BaselineError, BaselineOutcome, TabularMethod};
use crate::nn::Checkpoint;
use crate::rl::{train_loop, write_curves, CurveRecord, RlError, RunOptions};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRIALS_FILE: &str = "trials.csv";

/// Result of one training run.
pub struct TrainArtifacts {
    pub curve: Vec<CurveRecord>,
    pub checkpoint: Checkpoint,
    pub checkpoint_path: PathBuf,
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn save_curve(dir: &Path, curve: &[CurveRecord]) -> Result<(), HarnessError> {
    write_curves(&dir.join(CURVES_FILE), curve).map_err(|e| HarnessError::Internal(e.to_string()))
}

/// Trains `config.method` with `seed`, writing `curves.csv`,
/// `checkpoint.json`, and periodic checkpoints under `out`. A run that
/// fails part-way still leaves the curve gathered so far.
pub fn train_method(config: &ExperimentConfig, seed: u64, out: &Path) -> Result<TrainArtifacts, HarnessError> {
    config.validate().map_err(HarnessError::Config)?;
    create_dir(out)?;
    let options = RunOptions { record_wall_clock: config.output.wall_clock };
    let mut env = config.env.clone();
    env.seed = seed;
    let (curve, checkpoint) = match config.method {
        Method::Dral => {
            let ck_dir = out.join("checkpoints");
            let save = |iteration: usize, ck: &Checkpoint| -> Result<(), RlError> {
                std::fs::create_dir_all(&ck_dir).map_err(|e| RlError::Io(e.to_string()))?;
                ck.save(&ck_dir.join(format!("iter_{iteration:05}.json"))).map_err(RlError::from)
            };
            match train_loop(&env, &config.physics, &config.ppo(), seed, &options, save) {
                Ok(o) => (o.curve, o.checkpoint),
                Err(RlError::Interrupted { curve, source }) => {
                    save_curve(out, &curve)?;
                    return Err(HarnessError::Internal(format!("training failed: {source}")));
                }
                Err(RlError::Config(m)) => return Err(HarnessError::Config(m)),
                Err(e) => return Err(HarnessError::Internal(e.to_string())),
            }
        }
        m => {
            let result = match m {
                Method::Dqn => train_dqn(&env, &config.physics, &config.dqn(), seed, &options),
                Method::Sarsa => {
                    train_tabular(TabularMethod::Sarsa, &env, &config.physics, &config.tabular(m), seed, &options)
                }
                _ => train_tabular(TabularMethod::QLearning, &env, &config.physics, &config.tabular(m), seed, &options),
            };
            match result {
                Ok(BaselineOutcome { curve, checkpoint }) => (curve, checkpoint),
                Err(BaselineError::Interrupted { curve, source }) => {
                    save_curve(out, &curve)?;
                    return Err(HarnessError::Internal(format!("training failed: {source}")));
                }
                Err(BaselineError::Config(m)) => return Err(HarnessError::Config(m)),
                Err(e) => return Err(HarnessError::Internal(e.to_string())),
            }
        }
    };
    save_curve(out, &curve)?;
    let checkpoint_path = out.join(CHECKPOINT_FILE);
    checkpoint.save(&checkpoint_path).map_err(|e| HarnessError::Internal(e.to_string()))?;
    Ok(TrainArtifacts { curve, checkpoint, checkpoint_path })
}

/// Outputs of a full comparison.
pub struct BenchReport {
    pub summaries: Vec<MetricsSummary>,
    pub curves: Vec<CurveRecord>,
    pub table: ResultsTable,
}

/// Trains and evaluates every method on every seed, then writes
/// `summary.csv`, `table.csv`, `table.txt`, and the merged `curves.csv`
/// into the output directory. Per-run artifacts go to
/// `<out>/<method>/seed_<n>/`.
pub fn bench(config: &ExperimentConfig) -> Result<BenchReport, HarnessError> {
    bench_methods(config, &Method::ALL)
}

pub fn bench_methods(config: &ExperimentConfig, methods: &[Method]) -> Result<BenchReport, HarnessError> {
    config.validate().map_err(HarnessError::Config)?;
    let out = &config.output.dir;
    create_dir(out)?;
    let mut summaries = Vec::with_capacity(methods.len());
    let mut curves = Vec::with_capacity(methods.len());
    for &method in methods {
        let cfg = ExperimentConfig { method, ..config.clone() };
        let mut trials: Vec<TrialRecord> = Vec::new();
        let mut runs = Vec::with_capacity(cfg.eval.seeds.len());
        for &seed in &cfg.eval.seeds {
            log::info!("bench: training {method} with seed {seed}");
            let run_dir = out.join(method.name()).join(format!("seed_{seed}"));
            let art = train_method(&cfg, seed, &run_dir)?;
            let mut agent = Agent::from_checkpoint(&art.checkpoint)?;
            let t = evaluate_agent(&mut agent, &cfg.env, &cfg.physics, &cfg.eval.classes, &[seed], cfg.eval.n_trials)?;
            write_trials(&run_dir.join(TRIALS_FILE), &t)?;
            trials.extend(t);
            runs.push(art.curve);
        }
        write_trials(&out.join(method.name()).join(TRIALS_FILE), &trials)?;
        let summary = MetricsSummary::from_trials(method.name(), &trials);
        log::info!("bench: {method} overall success {:.3}", summary.overall_success_rate());
        summaries.push(summary);
        curves.push((method.name().to_string(), average_runs(method.name(), &runs)));
    }
    write_summary(&out.join(SUMMARY_FILE), &summaries)?;
    let table = emit_results_table(out, &summaries)?;
    let curves = emit_progress_curves(&out.join(CURVES_FILE), &curves)?;
    Ok(BenchReport { summaries, curves, table })
}
