//! Position error metrics and comparison-table rendering.
//!
//! PRMSE sums the squared errors of both axes inside the root; PMAE sums the
//! absolute errors of both axes and normalizes by the step count only.

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Summary of position errors for one tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub prmse: f64,
    pub pmae: f64,
    pub steps: usize,
    pub rmse_x: f64,
    pub rmse_y: f64,
    pub mae_x: f64,
    pub mae_y: f64,
}

fn check_lengths(truth: &[Vector2<f64>], estimate: &[Vector2<f64>]) -> Result<()> {
    if truth.len() != estimate.len() {
        return Err(Error::config(format!(
            "truth has {} steps, estimate has {}",
            truth.len(),
            estimate.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::config("metrics need at least one step"));
    }
    Ok(())
}

/// Position root mean square error: sqrt((1/T) Σ_k [ex² + ey²]).
pub fn prmse(truth: &[Vector2<f64>], estimate: &[Vector2<f64>]) -> Result<f64> {
    check_lengths(truth, estimate)?;
    let t = truth.len() as f64;
    let sum: f64 = truth
        .iter()
        .zip(estimate)
        .map(|(a, b)| {
            let e = a - b;
            e.x * e.x + e.y * e.y
        })
        .sum();
    Ok((sum / t).sqrt())
}

/// Position mean absolute error: (1/T) Σ_k [|ex| + |ey|].
pub fn pmae(truth: &[Vector2<f64>], estimate: &[Vector2<f64>]) -> Result<f64> {
    check_lengths(truth, estimate)?;
    let t = truth.len() as f64;
    let sum: f64 = truth
        .iter()
        .zip(estimate)
        .map(|(a, b)| {
            let e = a - b;
            e.x.abs() + e.y.abs()
        })
        .sum();
    Ok(sum / t)
}

/// Full report with per-axis breakdowns.
pub fn report(truth: &[Vector2<f64>], estimate: &[Vector2<f64>]) -> Result<MetricsReport> {
    check_lengths(truth, estimate)?;
    let t = truth.len() as f64;
    let (mut sx2, mut sy2, mut sax, mut say) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in truth.iter().zip(estimate) {
        let e = a - b;
        sx2 += e.x * e.x;
        sy2 += e.y * e.y;
        sax += e.x.abs();
        say += e.y.abs();
    }
    Ok(MetricsReport {
        prmse: ((sx2 + sy2) / t).sqrt(),
        pmae: (sax + say) / t,
        steps: truth.len(),
        rmse_x: (sx2 / t).sqrt(),
        rmse_y: (sy2 / t).sqrt(),
        mae_x: sax / t,
        mae_y: say / t,
    })
}

/// One labelled result for the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub r: f64,
    pub report: MetricsReport,
}

/// Comparison table over methods (rows) and measurement noise levels
/// (column groups), with per-column minima marked.
#[derive(Debug, Clone)]
pub struct BenchTable {
    labels: Vec<String>,
    r_values: Vec<f64>,
    /// cells[row][col] = (prmse, pmae); None when that combination was not run.
    cells: Vec<Vec<Option<(f64, f64)>>>,
    rows: Vec<BenchRow>,
}

/// Arranges rows into the Tables-3/4 style layout: one row per method label
/// (first-appearance order), PRMSE / PMAE column pairs per noise level.
pub fn bench_table(rows: &[BenchRow]) -> BenchTable {
    let mut labels: Vec<String> = Vec::new();
    for row in rows {
        if !labels.contains(&row.label) {
            labels.push(row.label.clone());
        }
    }
    let mut r_values: Vec<f64> = Vec::new();
    for row in rows {
        if !r_values.iter().any(|&r| r == row.r) {
            r_values.push(row.r);
        }
    }
    r_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cells = vec![vec![None; r_values.len()]; labels.len()];
    for row in rows {
        let i = labels.iter().position(|l| *l == row.label).unwrap();
        let j = r_values.iter().position(|&r| r == row.r).unwrap();
        cells[i][j] = Some((row.report.prmse, row.report.pmae));
    }
    BenchTable {
        labels,
        r_values,
        cells,
        rows: rows.to_vec(),
    }
}

impl BenchTable {
    /// Aligned text rendering; the minimum of each column is marked with `*`.
    pub fn text(&self) -> String {
        let mut col_min: Vec<(f64, f64)> = vec![(f64::INFINITY, f64::INFINITY); self.r_values.len()];
        for row in &self.cells {
            for (j, cell) in row.iter().enumerate() {
                if let Some((p, m)) = cell {
                    col_min[j].0 = col_min[j].0.min(*p);
                    col_min[j].1 = col_min[j].1.min(*m);
                }
            }
        }
        let label_w = self
            .labels
            .iter()
            .map(|l| l.len())
            .max()
            .unwrap_or(6)
            .max("method".len());
        let mut out = String::new();
        out.push_str(&format!("{:label_w$}", "method"));
        for r in &self.r_values {
            out.push_str(&format!("  {:>12} {:>12}", format!("PRMSE r={r}"), format!("PMAE r={r}")));
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("{label:label_w$}"));
            for (j, cell) in self.cells[i].iter().enumerate() {
                match cell {
                    Some((p, m)) => {
                        let pm = if *p == col_min[j].0 { "*" } else { " " };
                        let mm = if *m == col_min[j].1 { "*" } else { " " };
                        out.push_str(&format!("  {:>11.4}{pm} {:>11.4}{mm}", p, m));
                    }
                    None => out.push_str(&format!("  {:>12} {:>12}", "-", "-")),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Machine-readable long-format CSV; floats use the shortest
    /// round-trippable representation.
    pub fn csv(&self) -> String {
        let mut out = String::from("method,r,prmse,pmae,steps\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.label, row.r, row.report.prmse, row.report.pmae, row.report.steps
            ));
        }
        out
    }
}

/// Parses the long-format CSV produced by [`BenchTable::csv`].
pub fn parse_bench_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line != "method,r,prmse,pmae,steps" {
                return Err(Error::Format(format!("unexpected CSV header: {line}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 5 fields, got {}", parts.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            parts[i].parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad number '{}': {e}", parts[i]),
            })
        };
        rows.push(BenchRow {
            label: parts[0].to_string(),
            r: field(1)?,
            report: MetricsReport {
                prmse: field(2)?,
                pmae: field(3)?,
                steps: parts[4].parse().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad steps '{}': {e}", parts[4]),
                })?,
                rmse_x: 0.0,
                rmse_y: 0.0,
                mae_x: 0.0,
                mae_y: 0.0,
            },
        });
    }
    Ok(rows)
}
