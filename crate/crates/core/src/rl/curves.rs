use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RlError;
use crate::nn::write_atomic;

/// One learning-curve row. `None` cells are written empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub method: String,
    pub iteration: usize,
    pub env_steps: u64,
    /// Mean undiscounted return of episodes that ended in this iteration.
    pub mean_return: Option<f64>,
    /// Fraction of those episodes that ended in success.
    pub success_rate: Option<f64>,
    pub policy_loss: Option<f64>,
    pub value_loss: Option<f64>,
    pub entropy: Option<f64>,
    pub wall_clock_s: Option<f64>,
}

impl CurveRecord {
    /// One-line progress summary for logs; absent values print as `-`.
    pub fn progress_line(&self) -> String {
        let f = |x: Option<f64>, p: usize| x.map_or_else(|| "-".to_string(), |v| format!("{v:.p$}"));
        format!(
            "{} iter {}: steps {} return {} success {} value loss {}",
            self.method,
            self.iteration,
            self.env_steps,
            f(self.mean_return, 2),
            f(self.success_rate, 3),
            f(self.value_loss, 4)
        )
    }
}

pub const CURVE_HEADER: [&str; 9] = [
    "method",
    "iteration",
    "env_steps",
    "mean_return",
    "success_rate",
    "policy_loss",
    "value_loss",
    "entropy",
    "wall_clock_s",
];

pub fn curves_to_csv(records: &[CurveRecord]) -> Result<Vec<u8>, RlError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| RlError::Io(e.to_string());
    w.write_record(CURVE_HEADER).map_err(io)?;
    for r in records {
        w.serialize(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| RlError::Io(e.to_string()))
}

pub fn write_curves(path: &Path, records: &[CurveRecord]) -> Result<(), RlError> {
    write_atomic(path, &curves_to_csv(records)?).map_err(|e| RlError::Io(format!("{}: {e}", path.display())))
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRecord>, RlError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| RlError::Io(format!("{}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| RlError::Io(e.to_string()))?.clone();
    if headers.iter().ne(CURVE_HEADER) {
        return Err(RlError::Io(format!("{}: unexpected curve header {headers:?}", path.display())));
    }
    r.deserialize().map(|row| row.map_err(|e| RlError::Io(format!("{}: {e}", path.display())))).collect()
}
