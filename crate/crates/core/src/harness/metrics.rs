use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::env::TerminationReason;
use crate::nn::write_atomic;
use crate::world::PayloadClass;

/// Outcome of one evaluation episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Episode seed; re-running it reproduces the trial.
    pub seed: u64,
    pub class: PayloadClass,
    pub outcome: TerminationReason,
    /// Present exactly when the outcome is a success.
    pub reach_time_s: Option<f64>,
    pub steps: usize,
    pub path_length_m: f64,
}

/// Per-class aggregate of a method's trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub method: String,
    pub class: PayloadClass,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub reach_time_mean_s: Option<f64>,
    pub reach_time_std_s: Option<f64>,
}

/// Summaries for every evaluated class, in the order classes first appear.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsSummary {
    pub method: String,
    pub classes: Vec<ClassSummary>,
}

impl MetricsSummary {
    pub fn from_trials(method: &str, trials: &[TrialRecord]) -> Self {
        let mut order: Vec<PayloadClass> = Vec::new();
        for t in trials {
            if !order.contains(&t.class) {
                order.push(t.class);
            }
        }
        let classes = order
            .into_iter()
            .map(|class| {
                let of_class: Vec<&TrialRecord> = trials.iter().filter(|t| t.class == class).collect();
                let times: Vec<f64> = of_class.iter().filter_map(|t| t.reach_time_s).collect();
                let successes = of_class.iter().filter(|t| t.outcome == TerminationReason::Success).count();
                let (mean, std) = mean_std(&times);
                ClassSummary {
                    method: method.to_string(),
                    class,
                    trials: of_class.len(),
                    successes,
                    success_rate: successes as f64 / of_class.len() as f64,
                    reach_time_mean_s: mean,
                    reach_time_std_s: std,
                }
            })
            .collect();
        Self { method: method.to_string(), classes }
    }

    pub fn class(&self, class: PayloadClass) -> Option<&ClassSummary> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// Success rate over all trials of all classes.
    pub fn overall_success_rate(&self) -> f64 {
        let trials: usize = self.classes.iter().map(|c| c.trials).sum();
        let successes: usize = self.classes.iter().map(|c| c.successes).sum();
        if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        }
    }
}

/// Mean and population standard deviation; `None` for an empty sample.
pub fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

pub const TRIALS_HEADER: [&str; 6] = ["seed", "class", "outcome", "reach_time_s", "steps", "path_length_m"];
pub const SUMMARY_HEADER: [&str; 7] =
    ["method", "class", "trials", "successes", "success_rate", "reach_time_mean_s", "reach_time_std_s"];

fn to_csv<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let e = |e: csv::Error| HarnessError::Internal(format!("csv encoding: {e}"));
    w.write_record(header).map_err(e)?;
    for r in rows {
        w.serialize(r).map_err(e)?;
    }
    w.into_inner().map_err(|e| HarnessError::Internal(format!("csv encoding: {e}")))
}

fn from_csv<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<T>, HarnessError> {
    let bad = |e: csv::Error| HarnessError::Input(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(bad)?;
    let found = r.headers().map_err(bad)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(HarnessError::Input(format!("{}: unexpected header {found:?}", path.display())));
    }
    r.deserialize().map(|row| row.map_err(bad)).collect()
}

pub fn trials_csv(trials: &[TrialRecord]) -> Result<Vec<u8>, HarnessError> {
    to_csv(&TRIALS_HEADER, trials)
}

pub fn summary_csv(summaries: &[MetricsSummary]) -> Result<Vec<u8>, HarnessError> {
    let rows: Vec<&ClassSummary> = summaries.iter().flat_map(|s| &s.classes).collect();
    to_csv(&SUMMARY_HEADER, &rows)
}

pub fn write_trials(path: &Path, trials: &[TrialRecord]) -> Result<(), HarnessError> {
    write_atomic(path, &trials_csv(trials)?).map_err(|e| HarnessError::io(path, e))
}

pub fn write_summary(path: &Path, summaries: &[MetricsSummary]) -> Result<(), HarnessError> {
    write_atomic(path, &summary_csv(summaries)?).map_err(|e| HarnessError::io(path, e))
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    from_csv(path, &TRIALS_HEADER)
}

pub fn read_summary(path: &Path) -> Result<Vec<ClassSummary>, HarnessError> {
    from_csv(path, &SUMMARY_HEADER)
}
