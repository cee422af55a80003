//! Sales ingestion, report serialization and the command implementations
//! behind the CLI.

mod commands;
mod report;
mod sales;

use serde::{Deserialize, Serialize};

use crate::demand::WeekIndex;

pub use commands::{
    cmd_backtest, cmd_recommend, cmd_synth, cmd_validate, run_command, Command, OutputFormat,
    RunConfig, ENV_PREFIX,
};
pub use report::{
    backtest_csv, backtest_csv_rows, backtest_jsonl, backtest_markdown, decisions_csv,
    decisions_jsonl, decisions_markdown, read_backtest_csv, read_backtest_jsonl,
    read_decisions_csv, read_decisions_jsonl, BacktestCsvRow,
};
pub use sales::{load_sales, parse_sales, sales_csv, write_atomic, SalesData, WeekCalendar};

/// Units of one SKU sold in one cluster in one week.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SalesRecord {
    pub cluster_id: String,
    pub sku_id: String,
    pub week: WeekIndex,
    pub units: u64,
}
