//! Report renderings. CSV and json-lines carry full precision and reload
//! losslessly; markdown mirrors the printed tables (FI as a whole percent,
//! UI to two decimals). Undefined metrics are empty CSV fields, `null` in
//! json-lines and `n/a` in markdown.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::allocator::AllocationDecision;
use crate::backtest::{BacktestConfig, BacktestResult, Policy, RunMetadata};
use crate::error::{Error, Result};
use crate::metrics::ClusterMetrics;

const DECISION_HEADER: &str = "cluster_id,sku_id,q_star,eligible,lambda_hat,s,fractile,r";
const BACKTEST_HEADER: &str =
    "policy,cluster_id,r,fi,ui,delivered_total,ordered_total,predicted_total,prev_sold_total";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(field: &str, line: usize, name: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    parse_num(field, line, name).map(Some)
}

fn parse_num<T: std::str::FromStr>(field: &str, line: usize, name: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Input(format!("line {line}: bad {name} {field:?}")))
}

fn split_rows<'a>(text: &'a str, header: &str, width: usize) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::Input(format!("line 1: expected header {header}")));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != width {
                return Err(Error::Input(format!("line {}: expected {width} fields", i + 2)));
            }
            Ok((i + 2, fields))
        })
        .collect()
}

pub fn decisions_csv(decisions: &[AllocationDecision]) -> String {
    let mut out = String::from(DECISION_HEADER);
    out.push('\n');
    for d in decisions {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            d.cluster_id,
            d.sku_id,
            d.q_star,
            d.eligible,
            d.lambda_hat,
            d.s,
            opt(d.fractile),
            d.r
        )
        .expect("writing to a String");
    }
    out
}

pub fn read_decisions_csv(text: &str) -> Result<Vec<AllocationDecision>> {
    split_rows(text, DECISION_HEADER, 8)?
        .into_iter()
        .map(|(line, f)| {
            Ok(AllocationDecision {
                cluster_id: f[0].to_string(),
                sku_id: f[1].to_string(),
                q_star: parse_num(f[2], line, "q_star")?,
                eligible: parse_num(f[3], line, "eligible")?,
                lambda_hat: parse_num(f[4], line, "lambda_hat")?,
                s: parse_num(f[5], line, "s")?,
                fractile: parse_opt(f[6], line, "fractile")?,
                r: parse_num(f[7], line, "r")?,
            })
        })
        .collect()
}

pub fn decisions_markdown(decisions: &[AllocationDecision]) -> String {
    let mut out = String::from("| Cluster | SKU | q* | Eligible | λ̂ | s | Fractile |\n");
    out.push_str("|:--|:--|--:|:-:|--:|--:|--:|\n");
    for d in decisions {
        let fractile = d.fractile.map_or_else(|| "n/a".to_string(), |p| format!("{p:.4}"));
        writeln!(
            out,
            "| {} | {} | {} | {} | {:.3} | {} | {} |",
            d.cluster_id,
            d.sku_id,
            d.q_star,
            if d.eligible { "yes" } else { "no" },
            d.lambda_hat,
            d.s,
            fractile
        )
        .expect("writing to a String");
    }
    out
}

pub fn decisions_jsonl(decisions: &[AllocationDecision]) -> String {
    let mut out = String::new();
    for d in decisions {
        out.push_str(&serde_json::to_string(d).expect("decisions serialize"));
        out.push('\n');
    }
    out
}

pub fn read_decisions_jsonl(text: &str) -> Result<Vec<AllocationDecision>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Input(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// One cell of a backtest grid as it appears in CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestCsvRow {
    pub policy: Policy,
    pub r: f64,
    pub metrics: ClusterMetrics,
}

pub fn backtest_csv_rows(results: &[BacktestResult]) -> Vec<BacktestCsvRow> {
    let mut rows = Vec::new();
    for res in results {
        for row in &res.grid {
            for (m, &r) in row.iter().zip(&res.config.r_values) {
                rows.push(BacktestCsvRow {
                    policy: res.policy(),
                    r,
                    metrics: m.clone(),
                });
            }
        }
    }
    rows
}

/// Long-format grid: one line per (policy, cluster, r).
pub fn backtest_csv(results: &[BacktestResult]) -> String {
    let mut out = String::from(BACKTEST_HEADER);
    out.push('\n');
    for row in backtest_csv_rows(results) {
        let m = &row.metrics;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.policy,
            m.cluster_id,
            row.r,
            opt(m.fi),
            opt(m.ui),
            m.delivered_total,
            m.ordered_total,
            m.predicted_total,
            m.prev_sold_total
        )
        .expect("writing to a String");
    }
    out
}

pub fn read_backtest_csv(text: &str) -> Result<Vec<BacktestCsvRow>> {
    split_rows(text, BACKTEST_HEADER, 9)?
        .into_iter()
        .map(|(line, f)| {
            Ok(BacktestCsvRow {
                policy: f[0].parse()?,
                r: parse_num(f[2], line, "r")?,
                metrics: ClusterMetrics {
                    cluster_id: f[1].to_string(),
                    fi: parse_opt(f[3], line, "fi")?,
                    ui: parse_opt(f[4], line, "ui")?,
                    delivered_total: parse_num(f[5], line, "delivered_total")?,
                    ordered_total: parse_num(f[6], line, "ordered_total")?,
                    predicted_total: parse_num(f[7], line, "predicted_total")?,
                    prev_sold_total: parse_num(f[8], line, "prev_sold_total")?,
                },
            })
        })
        .collect()
}

fn fi_cell(fi: Option<f64>) -> String {
    fi.map_or_else(|| "n/a".to_string(), |v| format!("{:.0}%", v * 100.0))
}

fn ui_cell(ui: Option<f64>) -> String {
    ui.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

/// One policy: rows are clusters, an (FI, UI) column pair per r.
/// Several policies: one table per r with an (FI, UI) column pair per policy.
pub fn backtest_markdown(results: &[BacktestResult]) -> String {
    let mut out = String::new();
    let Some(first) = results.first() else {
        return out;
    };
    if results.len() == 1 {
        let mut header = String::from("| Region |");
        let mut rule = String::from("|:--|");
        for r in &first.config.r_values {
            write!(header, " FI (r={r}) | UI (r={r}) |").unwrap();
            rule.push_str("--:|--:|");
        }
        writeln!(out, "{header}\n{rule}").unwrap();
        for (cluster, row) in first.clusters.iter().zip(&first.grid) {
            write!(out, "| {cluster} |").unwrap();
            for m in row {
                write!(out, " {} | {} |", fi_cell(m.fi), ui_cell(m.ui)).unwrap();
            }
            out.push('\n');
        }
        return out;
    }

    for (i, r) in first.config.r_values.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "**r = {r}**\n").unwrap();
        let mut header = String::from("| Region |");
        let mut rule = String::from("|:--|");
        for res in results {
            write!(header, " {0} FI | {0} UI |", res.policy()).unwrap();
            rule.push_str("--:|--:|");
        }
        writeln!(out, "{header}\n{rule}").unwrap();
        for (c, cluster) in first.clusters.iter().enumerate() {
            write!(out, "| {cluster} |").unwrap();
            for res in results {
                let m = &res.grid[c][i];
                write!(out, " {} | {} |", fi_cell(m.fi), ui_cell(m.ui)).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum JsonLine {
    Run {
        config: BacktestConfig,
        clusters: Vec<String>,
        metadata: RunMetadata,
    },
    Cell {
        policy: Policy,
        r_index: usize,
        r: f64,
        metrics: ClusterMetrics,
    },
}

/// A `run` line per policy followed by its `cell` lines.
pub fn backtest_jsonl(results: &[BacktestResult]) -> String {
    let mut out = String::new();
    let mut push = |line: &JsonLine| {
        out.push_str(&serde_json::to_string(line).expect("report lines serialize"));
        out.push('\n');
    };
    for res in results {
        push(&JsonLine::Run {
            config: res.config.clone(),
            clusters: res.clusters.clone(),
            metadata: res.metadata.clone(),
        });
        for row in &res.grid {
            for (i, m) in row.iter().enumerate() {
                push(&JsonLine::Cell {
                    policy: res.policy(),
                    r_index: i,
                    r: res.config.r_values[i],
                    metrics: m.clone(),
                });
            }
        }
    }
    out
}

pub fn read_backtest_jsonl(text: &str) -> Result<Vec<BacktestResult>> {
    let mut results: Vec<BacktestResult> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let lineno = i + 1;
        let parsed: JsonLine =
            serde_json::from_str(line).map_err(|e| Error::Input(format!("line {lineno}: {e}")))?;
        match parsed {
            JsonLine::Run { config, clusters, metadata } => {
                let grid = vec![Vec::new(); clusters.len()];
                results.push(BacktestResult { config, clusters, grid, metadata });
            }
            JsonLine::Cell { policy, r_index, metrics, .. } => {
                let res = results
                    .last_mut()
                    .filter(|r| r.policy() == policy)
                    .ok_or_else(|| Error::Input(format!("line {lineno}: cell before its run line")))?;
                let c = res
                    .clusters
                    .iter()
                    .position(|id| *id == metrics.cluster_id)
                    .ok_or_else(|| Error::Input(format!("line {lineno}: unknown cluster {}", metrics.cluster_id)))?;
                if res.grid[c].len() != r_index {
                    return Err(Error::Input(format!("line {lineno}: cell out of order")));
                }
                res.grid[c].push(metrics);
            }
        }
    }
    Ok(results)
}
