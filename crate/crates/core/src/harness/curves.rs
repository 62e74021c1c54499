use std::path::Path;

use super::HarnessError;
use crate::rl::{write_curves, CurveRecord};

fn mean_some(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Averages the runs of one method row by row. Runs are cut to the shortest.
pub fn average_runs(method: &str, runs: &[Vec<CurveRecord>]) -> Vec<CurveRecord> {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let rows: Vec<&CurveRecord> = runs.iter().map(|r| &r[i]).collect();
            CurveRecord {
                method: method.to_string(),
                iteration: rows[0].iteration,
                env_steps: rows.iter().map(|r| r.env_steps).max().unwrap_or(0),
                mean_return: mean_some(rows.iter().map(|r| r.mean_return)),
                success_rate: mean_some(rows.iter().map(|r| r.success_rate)),
                policy_loss: mean_some(rows.iter().map(|r| r.policy_loss)),
                value_loss: mean_some(rows.iter().map(|r| r.value_loss)),
                entropy: mean_some(rows.iter().map(|r| r.entropy)),
                wall_clock_s: mean_some(rows.iter().map(|r| r.wall_clock_s)),
            }
        })
        .collect()
}

/// Long-format merge of per-method curves, cut to the smallest env-step
/// budget any method reached. Returns the rows and, when methods had to be
/// cut, a warning.
pub fn merge_curves(curves: &[(String, Vec<CurveRecord>)]) -> (Vec<CurveRecord>, Option<String>) {
    let budgets: Vec<u64> = curves.iter().map(|(_, c)| c.last().map_or(0, |r| r.env_steps)).collect();
    let limit = budgets.iter().copied().min().unwrap_or(0);
    let truncated = budgets.iter().any(|&b| b != limit);
    let rows = curves
        .iter()
        .flat_map(|(method, c)| {
            c.iter().filter(|r| r.env_steps <= limit).map(move |r| CurveRecord { method: method.clone(), ..r.clone() })
        })
        .collect();
    let warning = truncated.then(|| format!("curves cut to the shortest budget of {limit} env steps (budgets were {budgets:?})"));
    (rows, warning)
}

/// Writes the merged curves to `path`, logging a warning when budgets
/// differed.
pub fn emit_progress_curves(path: &Path, curves: &[(String, Vec<CurveRecord>)]) -> Result<Vec<CurveRecord>, HarnessError> {
    let (rows, warning) = merge_curves(curves);
    if let Some(w) = warning {
        log::warn!("{w}");
    }
    write_curves(path, &rows).map_err(|e| HarnessError::Internal(e.to_string()))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(method: &str, n: usize, step: u64, ret: f64) -> Vec<CurveRecord> {
        (1..=n)
            .map(|i| CurveRecord {
                method: method.into(),
                iteration: i,
                env_steps: i as u64 * step,
                mean_return: Some(ret),
                success_rate: None,
                policy_loss: None,
                value_loss: None,
                entropy: None,
                wall_clock_s: None,
            })
            .collect()
    }

    #[test]
    fn single_method_passes_through_with_method_column() {
        let c = curve("x", 3, 100, 1.0);
        let (rows, w) = merge_curves(&[("dral".into(), c.clone())]);
        assert!(w.is_none());
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.method == "dral"));
        assert_eq!(rows.iter().map(|r| r.env_steps).collect::<Vec<_>>(), vec![100, 200, 300]);
    }

    #[test]
    fn equal_budgets_share_a_grid() {
        let input: Vec<(String, Vec<CurveRecord>)> =
            ["dral", "sarsa", "dqn", "qlearning"].iter().map(|m| (m.to_string(), curve(m, 5, 64, 0.0))).collect();
        let (rows, w) = merge_curves(&input);
        assert!(w.is_none());
        assert_eq!(rows.len(), 20);
        for m in ["dral", "sarsa", "dqn", "qlearning"] {
            let grid: Vec<u64> = rows.iter().filter(|r| r.method == m).map(|r| r.env_steps).collect();
            assert_eq!(grid, vec![64, 128, 192, 256, 320]);
        }
    }

    #[test]
    fn mismatched_budgets_truncate_and_warn() {
        let (rows, w) = merge_curves(&[("a".into(), curve("a", 5, 10, 0.0)), ("b".into(), curve("b", 3, 10, 0.0))]);
        assert!(w.is_some());
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.env_steps <= 30));
    }

    #[test]
    fn averaging_over_seeds() {
        let avg = average_runs("m", &[curve("m", 2, 10, 1.0), curve("m", 3, 10, 3.0)]);
        assert_eq!(avg.len(), 2);
        assert_eq!(avg[0].mean_return, Some(2.0));
        assert_eq!(avg[1].success_rate, None);
    }
}
