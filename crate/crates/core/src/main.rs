use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use newsboy::backtest::{Policy, DEFAULT_R, DEFAULT_WINDOW_WEEKS};
use newsboy::io::{run_command, Command, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "newsboy", version, about = "Newsboy-model SKU allocation and backtesting")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Recommend a quantity for every (cluster, SKU) in the sales file.
    Recommend(Flags),
    /// Score policies on a past target week over a sweep of r.
    Backtest(Flags),
    /// Write a seeded synthetic sales CSV.
    Synth(Flags),
    /// Parse and check a sales file.
    Validate(Flags),
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: newsboy::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: newsboy::Error| e.to_string())
}

#[derive(Args)]
struct Flags {
    /// Sales CSV with header cluster_id,sku_id,week,units.
    #[arg(long, env = "NEWSBOY_INPUT")]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, env = "NEWSBOY_OUTPUT")]
    output: Option<PathBuf>,
    /// FI/UI trade-off weight for `recommend`.
    #[arg(long, env = "NEWSBOY_R", default_value_t = DEFAULT_R)]
    r: f64,
    /// Comma-separated r sweep for `backtest`.
    #[arg(
        long,
        env = "NEWSBOY_R_VALUES",
        value_delimiter = ',',
        default_value = "0.025,0.05,0.1,0.2,0.4"
    )]
    r_values: Vec<f64>,
    #[arg(long, env = "NEWSBOY_WINDOW_WEEKS", default_value_t = DEFAULT_WINDOW_WEEKS)]
    window_weeks: u32,
    /// Week label (ISO YYYY-Www or integer, matching the input).
    #[arg(long, env = "NEWSBOY_TARGET_WEEK")]
    target_week: Option<String>,
    /// Comma-separated policies: newsboy, naive_last_week, window_mean.
    #[arg(
        long,
        env = "NEWSBOY_POLICY",
        value_delimiter = ',',
        default_value = "newsboy",
        value_parser = parse_policy
    )]
    policy: Vec<Policy>,
    #[arg(long, env = "NEWSBOY_SEED", default_value_t = 0)]
    seed: u64,
    /// csv, markdown or json-lines.
    #[arg(long, env = "NEWSBOY_FORMAT", default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
    /// Synthetic world: number of clusters.
    #[arg(long, env = "NEWSBOY_CLUSTERS", default_value_t = 12)]
    clusters: u32,
    /// Synthetic world: SKUs per cluster.
    #[arg(long, env = "NEWSBOY_SKUS_PER_CLUSTER", default_value_t = 200)]
    skus_per_cluster: u32,
    /// Synthetic world: number of weeks.
    #[arg(long, env = "NEWSBOY_WEEKS", default_value_t = 12)]
    weeks: u32,
}

impl From<Flags> for RunConfig {
    fn from(f: Flags) -> Self {
        RunConfig {
            input: f.input,
            output: f.output,
            r: f.r,
            r_values: f.r_values,
            window_weeks: f.window_weeks,
            target_week: f.target_week,
            policies: f.policy,
            seed: f.seed,
            format: f.format,
            clusters: f.clusters,
            skus_per_cluster: f.skus_per_cluster,
            weeks: f.weeks,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Recommend(f) => (Command::Recommend, f),
        Cmd::Backtest(f) => (Command::Backtest, f),
        Cmd::Synth(f) => (Command::Synth, f),
        Cmd::Validate(f) => (Command::Validate, f),
    };
    let code = run_command(command, &flags.into());
    ExitCode::from(code as u8)
}
