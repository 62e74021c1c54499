use std::path::Path;

use super::metrics::MetricsSummary;
use super::HarnessError;
use crate::nn::write_atomic;
use crate::world::PayloadClass;

pub const MISSING: &str = "—";
pub const METRICS: [&str; 2] = ["success_rate", "reach_time_s"];

/// Results grid: one row per metric and method, one column per class.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultsTable {
    pub classes: Vec<PayloadClass>,
    /// (metric, method, one cell per class)
    pub rows: Vec<(String, String, Vec<Option<f64>>)>,
}

impl ResultsTable {
    pub fn new(summaries: &[MetricsSummary]) -> Self {
        let classes: Vec<PayloadClass> = PayloadClass::ALL
            .into_iter()
            .filter(|c| summaries.iter().any(|s| s.class(*c).is_some()))
            .collect();
        let mut rows = Vec::with_capacity(METRICS.len() * summaries.len());
        for metric in METRICS {
            for s in summaries {
                let cells = classes
                    .iter()
                    .map(|&c| {
                        s.class(c).and_then(|cs| match metric {
                            "success_rate" => Some(cs.success_rate),
                            _ => cs.reach_time_mean_s,
                        })
                    })
                    .collect();
                rows.push((metric.to_string(), s.method.clone(), cells));
            }
        }
        Self { classes, rows }
    }

    fn cell(v: Option<f64>, metric: &str) -> String {
        match v {
            None => MISSING.to_string(),
            Some(x) if metric == "success_rate" => format!("{x:.3}"),
            Some(x) => format!("{x:.1}"),
        }
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["metric".to_string(), "method".to_string()];
        h.extend(self.classes.iter().map(|c| c.name().to_string()));
        h
    }

    fn body(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|(metric, method, cells)| {
                let mut r = vec![metric.clone(), method.clone()];
                r.extend(cells.iter().map(|v| Self::cell(*v, metric)));
                r
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let e = |e: csv::Error| HarnessError::Internal(format!("csv encoding: {e}"));
        w.write_record(self.header()).map_err(e)?;
        for r in self.body() {
            w.write_record(r).map_err(e)?;
        }
        w.into_inner().map_err(|e| HarnessError::Internal(format!("csv encoding: {e}")))
    }

    /// Column-aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut lines = vec![self.header()];
        lines.extend(self.body());
        let n_cols = lines[0].len();
        let widths: Vec<usize> =
            (0..n_cols).map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, l) in lines.iter().enumerate() {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
                out.push('\n');
            }
        }
        out
    }
}

/// Writes `table.csv` and `table.txt` into `dir`.
pub fn emit_results_table(dir: &Path, summaries: &[MetricsSummary]) -> Result<ResultsTable, HarnessError> {
    let table = ResultsTable::new(summaries);
    let csv_path = dir.join("table.csv");
    write_atomic(&csv_path, &table.to_csv()?).map_err(|e| HarnessError::io(&csv_path, e))?;
    let txt_path = dir.join("table.txt");
    write_atomic(&txt_path, table.to_text().as_bytes()).map_err(|e| HarnessError::io(&txt_path, e))?;
    Ok(table)
}
