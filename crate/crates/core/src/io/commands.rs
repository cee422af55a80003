//! `recommend`, `backtest`, `synth` and `validate`.
//!
//! Every command validates its configuration before reading data. Outputs go
//! to stdout, or to `--output` via an atomic rename with a `.meta.json`
//! sidecar holding the run timestamp, the config echo and the week mapping.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{
    backtest_csv, backtest_jsonl, backtest_markdown, decisions_csv, decisions_jsonl,
    decisions_markdown,
};
use super::sales::{load_sales, sales_csv, write_atomic, SalesData, WeekCalendar};
use crate::allocator::{allocate, validate_r};
use crate::backtest::{
    collect_windows, generate_world, run_backtest, run_policy_comparison, BacktestConfig, Policy,
    SyntheticWorld, DEFAULT_R, DEFAULT_R_VALUES, DEFAULT_WINDOW_WEEKS, GENERATOR_ID,
};
use crate::error::{Error, Result};

/// Environment variables `NEWSBOY_<FLAG>` supply any flag not given on the command line.
pub const ENV_PREFIX: &str = "NEWSBOY_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Recommend,
    Backtest,
    Synth,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Markdown,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" => Ok(OutputFormat::Markdown),
            "json-lines" => Ok(OutputFormat::JsonLines),
            _ => Err(Error::config(
                "format",
                format!("unknown format {s:?}; expected csv, markdown or json-lines"),
            )),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "markdown",
            OutputFormat::JsonLines => "json-lines",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub r: f64,
    pub r_values: Vec<f64>,
    pub window_weeks: u32,
    /// Label in the input's week format; defaults depend on the command.
    pub target_week: Option<String>,
    pub policies: Vec<Policy>,
    pub seed: u64,
    pub format: OutputFormat,
    pub clusters: u32,
    pub skus_per_cluster: u32,
    pub weeks: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            output: None,
            r: DEFAULT_R,
            r_values: DEFAULT_R_VALUES.to_vec(),
            window_weeks: DEFAULT_WINDOW_WEEKS,
            target_week: None,
            policies: vec![Policy::Newsboy],
            seed: 0,
            format: OutputFormat::Csv,
            clusters: 12,
            skus_per_cluster: 200,
            weeks: 12,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, command: Command) -> Result<()> {
        let needs_input = || {
            self.input
                .as_ref()
                .map(|_| ())
                .ok_or_else(|| Error::config("input", "an input sales file is required"))
        };
        let window = || {
            if self.window_weeks == 0 {
                Err(Error::config("window_weeks", "must be at least 1"))
            } else {
                Ok(())
            }
        };
        match command {
            Command::Recommend => {
                needs_input()?;
                window()?;
                validate_r(self.r)?;
            }
            Command::Backtest => {
                needs_input()?;
                window()?;
                BacktestConfig {
                    window_weeks: self.window_weeks,
                    target_week: 0,
                    r_values: self.r_values.clone(),
                    policy: Policy::Newsboy,
                    seed: self.seed,
                }
                .validate()?;
                if self.policies.is_empty() {
                    return Err(Error::config("policy", "at least one policy is required"));
                }
                for (i, p) in self.policies.iter().enumerate() {
                    if self.policies[..i].contains(p) {
                        return Err(Error::config("policy", format!("{p} listed twice")));
                    }
                }
            }
            Command::Synth => {
                if self.clusters == 0 {
                    return Err(Error::config("clusters", "must be at least 1"));
                }
                self.world().validate()?;
            }
            Command::Validate => needs_input()?,
        }
        Ok(())
    }

    fn world(&self) -> SyntheticWorld {
        SyntheticWorld::new(self.clusters, self.skus_per_cluster, self.weeks, self.seed)
    }

    fn load(&self) -> Result<SalesData> {
        load_sales(self.input.as_ref().expect("validated input"))
    }
}

fn week_range(data: &SalesData) -> Result<(u32, u32)> {
    let min = data.records.iter().map(|r| r.week).min();
    let max = data.records.iter().map(|r| r.week).max();
    min.zip(max)
        .ok_or_else(|| Error::Input("the sales file has no records".into()))
}

fn relabel(err: Error, calendar: &WeekCalendar, window_weeks: u32) -> Error {
    match err {
        Error::TargetWeekOutOfRange { target_week, earliest_usable, latest_usable } => {
            Error::Input(format!(
                "insufficient history for target week {}: {window_weeks} weeks of history are \
                 needed; earliest usable target week is {}, latest is {}",
                calendar.label(target_week),
                calendar.label(earliest_usable),
                calendar.label(latest_usable)
            ))
        }
        other => other,
    }
}

fn emit(cfg: &RunConfig, command: Command, body: &str, extra: serde_json::Value) -> Result<()> {
    match &cfg.output {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            let generated_at = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let meta = json!({
                "command": command,
                "generated_at_unix": generated_at,
                "config": cfg,
                "details": extra,
            });
            let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
            write_atomic(&sidecar_path(path), text.as_bytes())
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Allocation for the week after the data (or `--target-week`) for every SKU.
pub fn cmd_recommend(cfg: &RunConfig) -> Result<()> {
    cfg.validate(Command::Recommend)?;
    let data = cfg.load()?;
    let (_, last) = week_range(&data)?;
    let target = match &cfg.target_week {
        Some(label) => data.calendar.index(label)?,
        None => last + 1,
    };
    let set = collect_windows(&data.records, target, cfg.window_weeks)
        .map_err(|e| relabel(e, &data.calendar, cfg.window_weeks))?;
    let windows: Vec<_> = set.windows.into_iter().map(|sw| sw.window).collect();
    let batch = allocate(&windows, cfg.r)?;
    for f in &batch.failures {
        eprintln!("warning: {} {}: {}", f.cluster_id, f.sku_id, f.message);
    }
    let body = match cfg.format {
        OutputFormat::Csv => decisions_csv(&batch.decisions),
        OutputFormat::Markdown => decisions_markdown(&batch.decisions),
        OutputFormat::JsonLines => decisions_jsonl(&batch.decisions),
    };
    let ineligible = batch.decisions.iter().filter(|d| !d.eligible).count();
    emit(
        cfg,
        Command::Recommend,
        &body,
        json!({
            "target_week": data.calendar.label(target),
            "week_calendar": data.calendar,
            "decisions": batch.decisions.len(),
            "ineligible": ineligible,
            "skipped_skus": set.skipped_skus,
            "failures": batch.failures,
        }),
    )
}

/// FI/UI grid over r for one policy, or the side-by-side comparison for several.
pub fn cmd_backtest(cfg: &RunConfig) -> Result<()> {
    cfg.validate(Command::Backtest)?;
    let data = cfg.load()?;
    let (_, last) = week_range(&data)?;
    let target = match &cfg.target_week {
        Some(label) => data.calendar.index(label)?,
        None => last,
    };
    let config = BacktestConfig {
        window_weeks: cfg.window_weeks,
        target_week: target,
        r_values: cfg.r_values.clone(),
        policy: cfg.policies[0],
        seed: cfg.seed,
    };
    let results = if cfg.policies.len() == 1 {
        vec![run_backtest(&data.records, &config)]
    } else {
        match run_policy_comparison(&data.records, &config, &cfg.policies) {
            Ok(c) => c.results.into_iter().map(Ok).collect(),
            Err(e) => vec![Err(e)],
        }
    }
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .map_err(|e| relabel(e, &data.calendar, cfg.window_weeks))?;

    let body = match cfg.format {
        OutputFormat::Csv => backtest_csv(&results),
        OutputFormat::Markdown => backtest_markdown(&results),
        OutputFormat::JsonLines => backtest_jsonl(&results),
    };
    let metadata: Vec<_> = results
        .iter()
        .map(|r| json!({ "policy": r.policy(), "metadata": r.metadata }))
        .collect();
    emit(
        cfg,
        Command::Backtest,
        &body,
        json!({
            "target_week": data.calendar.label(target),
            "week_calendar": data.calendar,
            "runs": metadata,
        }),
    )
}

/// Seeded synthetic sales CSV with integer week labels.
pub fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    cfg.validate(Command::Synth)?;
    let world = cfg.world();
    let records = generate_world(&world)?;
    let body = sales_csv(&records, WeekCalendar::Integer);
    emit(
        cfg,
        Command::Synth,
        &body,
        json!({ "world": world, "generator": GENERATOR_ID, "records": records.len() }),
    )
}

/// Parse and check a sales file, reporting its shape.
pub fn cmd_validate(cfg: &RunConfig) -> Result<()> {
    cfg.validate(Command::Validate)?;
    let data = cfg.load()?;
    let mut clusters: Vec<&str> = data.records.iter().map(|r| r.cluster_id.as_str()).collect();
    clusters.sort_unstable();
    clusters.dedup();
    let mut skus: Vec<(&str, &str)> = data
        .records
        .iter()
        .map(|r| (r.cluster_id.as_str(), r.sku_id.as_str()))
        .collect();
    skus.sort_unstable();
    skus.dedup();
    let weeks = match week_range(&data) {
        Ok((lo, hi)) => format!("{}..{}", data.calendar.label(lo), data.calendar.label(hi)),
        Err(_) => "none".to_string(),
    };
    let body = format!(
        "records: {}\nclusters: {}\ncluster_skus: {}\nweeks: {}\n",
        data.records.len(),
        clusters.len(),
        skus.len(),
        weeks
    );
    emit(cfg, Command::Validate, &body, json!({ "week_calendar": data.calendar }))
}

/// Run a command and map the outcome to a process exit status.
pub fn run_command(command: Command, cfg: &RunConfig) -> i32 {
    let result = match command {
        Command::Recommend => cmd_recommend(cfg),
        Command::Backtest => cmd_backtest(cfg),
        Command::Synth => cmd_synth(cfg),
        Command::Validate => cmd_validate(cfg),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
