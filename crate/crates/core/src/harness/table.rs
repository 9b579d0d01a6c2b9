use std::fmt::Write as _;

use crate::evaluation::MetricsReport;

pub const STAT_NAMES: [&str; 6] = ["ANN", "ANN-P", "F1", "F2", "ACC", "BAC"];

/// ANN and ANN-P are better when lower; every other statistic when higher.
pub fn lower_is_better(stat: &str) -> bool {
    matches!(stat, "ANN" | "ANN-P")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub stat: &'static str,
    /// One value per monitor column.
    pub values: Vec<f64>,
    pub final_value: f64,
    /// Indices of the monitors attaining the best value. `Final` never counts.
    pub best: Vec<usize>,
}

/// Averaged statistics for one dataset: one row per statistic, one column per
/// monitor plus the full-pool `Final` baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub dataset: String,
    pub monitors: Vec<String>,
    pub rows: Vec<TableRow>,
}

pub fn emit_table(
    dataset: &str,
    monitors: &[String],
    per_monitor: &[MetricsReport<f64>],
    final_metrics: &MetricsReport<f64>,
) -> ResultsTable {
    assert_eq!(monitors.len(), per_monitor.len());
    let finals = final_metrics.stats();
    let rows = STAT_NAMES
        .iter()
        .enumerate()
        .map(|(s, &stat)| {
            let values: Vec<f64> = per_monitor.iter().map(|r| r.stats()[s]).collect();
            let target = if lower_is_better(stat) {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            } else {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let best = (0..values.len()).filter(|&i| values[i] == target).collect();
            TableRow {
                stat,
                values,
                final_value: finals[s],
                best,
            }
        })
        .collect();
    ResultsTable {
        dataset: dataset.to_string(),
        monitors: monitors.to_vec(),
        rows,
    }
}

impl ResultsTable {
    pub fn row(&self, stat: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.stat == stat)
    }

    pub fn value(&self, stat: &str, monitor: &str) -> Option<f64> {
        let m = self.monitors.iter().position(|n| n == monitor)?;
        Some(self.row(stat)?.values[m])
    }

    pub fn best_names(&self, row: &TableRow) -> String {
        row.best.iter().map(|&i| self.monitors[i].as_str()).collect::<Vec<_>>().join(";")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["dataset".to_string(), "stat".to_string()];
        header.extend(self.monitors.iter().cloned());
        header.push("Final".into());
        header.push("best".into());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![self.dataset.clone(), row.stat.to_string()];
            rec.extend(row.values.iter().map(f64::to_string));
            rec.push(row.final_value.to_string());
            rec.push(self.best_names(row));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Fixed-width text rendering at three decimals; best cells carry a `*`.
    pub fn to_text(&self) -> String {
        let mut header: Vec<String> = vec![self.dataset.clone()];
        header.extend(self.monitors.iter().cloned());
        header.push("Final".into());
        let mut cells: Vec<Vec<String>> = vec![header];
        for row in &self.rows {
            let mut line = vec![row.stat.to_string()];
            for (i, v) in row.values.iter().enumerate() {
                let mark = if row.best.contains(&i) { "*" } else { "" };
                line.push(format!("{v:.3}{mark}"));
            }
            line.push(format!("{:.3}", row.final_value));
            cells.push(line);
        }
        let widths: Vec<usize> = (0..cells[0].len())
            .map(|c| cells.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (r, line) in cells.iter().enumerate() {
            let parts: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
            if r == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                writeln!(out, "{}", "-".repeat(total)).unwrap();
            }
        }
        out
    }
}
