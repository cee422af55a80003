//! Rolling-window evaluation of allocation policies.
//!
//! For a target week `t`, every (cluster, SKU) is fitted on the
//! `window_weeks` weeks before `t`, allocated, and scored against the sales
//! recorded in `t`. Recorded sales stand in for demand, so stockout-censored
//! demand is invisible to the metrics.

mod synth;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{is_eligible, solve_poisson_closed_form, validate_r, AllocationParams};
use crate::demand::{fit_poisson_mle, SalesWindow, WeekIndex};
use crate::error::{Error, Result};
use crate::io::SalesRecord;
use crate::metrics::{cluster_metrics, ClusterMetrics, WeekOutcome};

pub use synth::{
    estimate_expected_fi, generate_world, generate_world_with_rates, LambdaSampler,
    MonteCarloEstimate, SyntheticWorld, GENERATOR_ID,
};

pub const DEFAULT_WINDOW_WEEKS: u32 = 9;
pub const DEFAULT_R: f64 = 0.1;
pub const DEFAULT_R_VALUES: [f64; 5] = [0.025, 0.05, 0.1, 0.2, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Poisson quantile at `1 − r·λ̂/s`.
    Newsboy,
    /// `q = s`.
    NaiveLastWeek,
    /// `q = round(λ̂)`.
    WindowMean,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Newsboy, Policy::NaiveLastWeek, Policy::WindowMean];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Newsboy => "newsboy",
            Policy::NaiveLastWeek => "naive_last_week",
            Policy::WindowMean => "window_mean",
        }
    }

    /// Whether the allocation depends on `r`.
    pub fn uses_r(self) -> bool {
        matches!(self, Policy::Newsboy)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "policy",
                    format!("unknown policy {s:?}; expected newsboy, naive_last_week or window_mean"),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub window_weeks: u32,
    pub target_week: WeekIndex,
    pub r_values: Vec<f64>,
    pub policy: Policy,
    pub seed: u64,
}

impl BacktestConfig {
    pub fn new(target_week: WeekIndex) -> Self {
        Self {
            window_weeks: DEFAULT_WINDOW_WEEKS,
            target_week,
            r_values: DEFAULT_R_VALUES.to_vec(),
            policy: Policy::Newsboy,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_weeks == 0 {
            return Err(Error::config("window_weeks", "must be at least 1"));
        }
        if self.r_values.is_empty() {
            return Err(Error::config("r_values", "must not be empty"));
        }
        for &r in &self.r_values {
            validate_r(r).map_err(|_| {
                Error::config("r_values", format!("every r must lie in (0, 10], got {r}"))
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// (cluster, SKU) pairs that received a decision.
    pub sku_count: usize,
    /// Pairs with no record inside the window.
    pub skipped_skus: usize,
    /// Newsboy SKUs without a recommendation, per r; zeros for the baselines.
    pub ineligible_per_r: Vec<usize>,
}

/// Cluster × r grid of metrics for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub config: BacktestConfig,
    pub clusters: Vec<String>,
    /// `grid[c][i]` holds cluster `clusters[c]` at `config.r_values[i]`.
    pub grid: Vec<Vec<ClusterMetrics>>,
    pub metadata: RunMetadata,
}

impl BacktestResult {
    pub fn policy(&self) -> Policy {
        self.config.policy
    }

    pub fn cell(&self, cluster: &str, r_index: usize) -> Option<&ClusterMetrics> {
        let c = self.clusters.iter().position(|id| id == cluster)?;
        self.grid.get(c)?.get(r_index)
    }
}

/// Results for several policies over identical windows and target week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComparison {
    pub results: Vec<BacktestResult>,
}

/// One SKU's window plus what it sold in the target week.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredWindow {
    pub window: SalesWindow,
    pub realized: u64,
}

/// Windows for every (cluster, SKU) with history before a target week.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    /// Clusters in order of first appearance in the sales.
    pub clusters: Vec<String>,
    pub windows: Vec<ScoredWindow>,
    pub skipped_skus: usize,
}

#[derive(Default)]
struct Series {
    by_week: HashMap<WeekIndex, u64>,
}

/// Build the `window_weeks` windows ending the week before `target_week`.
///
/// Weeks without a record count as zero sales. A (cluster, SKU) with no record
/// inside the window is skipped. `target_week` may lie one week past the data,
/// in which case the realized sales are zero.
pub fn collect_windows(
    sales: &[SalesRecord],
    target_week: WeekIndex,
    window_weeks: u32,
) -> Result<WindowSet> {
    if window_weeks == 0 {
        return Err(Error::config("window_weeks", "must be at least 1"));
    }
    let (min_week, max_week) = week_span(sales)?;
    let earliest_usable = min_week + window_weeks;
    if target_week < earliest_usable || target_week > max_week + 1 {
        return Err(Error::TargetWeekOutOfRange {
            target_week,
            earliest_usable,
            latest_usable: max_week + 1,
        });
    }

    let mut clusters: Vec<String> = Vec::new();
    let mut cluster_seen: HashMap<&str, ()> = HashMap::new();
    let mut keys: Vec<(&str, &str)> = Vec::new();
    let mut series: HashMap<(&str, &str), Series> = HashMap::new();
    for rec in sales {
        if cluster_seen.insert(&rec.cluster_id, ()).is_none() {
            clusters.push(rec.cluster_id.clone());
        }
        let key = (rec.cluster_id.as_str(), rec.sku_id.as_str());
        let entry = series.entry(key).or_insert_with(|| {
            keys.push(key);
            Series::default()
        });
        if entry.by_week.insert(rec.week, rec.units).is_some() {
            return Err(Error::Input(format!(
                "duplicate sales record for cluster {} sku {} week {}",
                rec.cluster_id, rec.sku_id, rec.week
            )));
        }
    }

    let first = target_week - window_weeks;
    let mut windows = Vec::with_capacity(keys.len());
    let mut skipped_skus = 0;
    for key in keys {
        let s = &series[&key];
        if !(first..target_week).any(|w| s.by_week.contains_key(&w)) {
            skipped_skus += 1;
            continue;
        }
        let weekly_sales = (first..target_week)
            .map(|w| s.by_week.get(&w).copied().unwrap_or(0))
            .collect();
        windows.push(ScoredWindow {
            window: SalesWindow::new(key.0, key.1, weekly_sales, target_week),
            realized: s.by_week.get(&target_week).copied().unwrap_or(0),
        });
    }
    Ok(WindowSet {
        clusters,
        windows,
        skipped_skus,
    })
}

fn week_span(sales: &[SalesRecord]) -> Result<(WeekIndex, WeekIndex)> {
    let min = sales.iter().map(|r| r.week).min();
    let max = sales.iter().map(|r| r.week).max();
    match (min, max) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => Err(Error::Input("no sales records".into())),
    }
}

/// Allocated units for each r, plus whether the SKU was ineligible at that r.
fn policy_allocations(policy: Policy, window: &SalesWindow, r_values: &[f64]) -> Result<Vec<(u64, bool)>> {
    let model = fit_poisson_mle(window)?;
    let s = window.last_week_sales().expect("windows are non-empty");
    match policy {
        Policy::Newsboy => r_values
            .iter()
            .map(|&r| {
                let decision = solve_poisson_closed_form(&AllocationParams::new(r, s, model.clone())?);
                debug_assert_eq!(decision.eligible, is_eligible(model.lambda_hat, s, r));
                Ok((decision.q_star, !decision.eligible))
            })
            .collect(),
        Policy::NaiveLastWeek => Ok(vec![(s, false); r_values.len()]),
        Policy::WindowMean => Ok(vec![(model.lambda_hat.round() as u64, false); r_values.len()]),
    }
}

/// Run one policy over every (cluster, r) pair of the config.
pub fn run_backtest(sales: &[SalesRecord], config: &BacktestConfig) -> Result<BacktestResult> {
    config.validate()?;
    let (min_week, max_week) = week_span(sales)?;
    let earliest_usable = min_week + config.window_weeks;
    if config.target_week < earliest_usable || config.target_week > max_week {
        return Err(Error::TargetWeekOutOfRange {
            target_week: config.target_week,
            earliest_usable,
            latest_usable: max_week,
        });
    }
    let set = collect_windows(sales, config.target_week, config.window_weeks)?;
    evaluate(&set, config)
}

fn evaluate(set: &WindowSet, config: &BacktestConfig) -> Result<BacktestResult> {
    let n_r = config.r_values.len();
    let allocations: Vec<Vec<(u64, bool)>> = set
        .windows
        .par_iter()
        .map(|sw| policy_allocations(config.policy, &sw.window, &config.r_values))
        .collect::<Result<_>>()?;

    let cluster_index: HashMap<&str, usize> = set
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    // outcomes[cluster][r]
    let mut outcomes: Vec<Vec<Vec<WeekOutcome>>> = vec![vec![Vec::new(); n_r]; set.clusters.len()];
    let mut ineligible_per_r = vec![0usize; n_r];
    for (sw, allocs) in set.windows.iter().zip(&allocations) {
        let c = cluster_index[sw.window.cluster_id.as_str()];
        let prev = sw.window.last_week_sales().expect("windows are non-empty");
        for (i, &(allocated, ineligible)) in allocs.iter().enumerate() {
            if ineligible {
                ineligible_per_r[i] += 1;
            }
            outcomes[c][i].push(WeekOutcome {
                cluster_id: sw.window.cluster_id.clone(),
                sku_id: sw.window.sku_id.clone(),
                ordered_units: sw.realized,
                allocated_units: allocated,
                prev_week_sold_units: prev,
            });
        }
    }

    let grid = set
        .clusters
        .iter()
        .zip(&outcomes)
        .map(|(cluster, per_r)| {
            per_r
                .iter()
                .map(|o| cluster_metrics(cluster, o))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BacktestResult {
        config: config.clone(),
        clusters: set.clusters.clone(),
        grid,
        metadata: RunMetadata {
            sku_count: set.windows.len(),
            skipped_skus: set.skipped_skus,
            ineligible_per_r,
        },
    })
}

/// Run several policies on the same windows and target week.
pub fn run_policy_comparison(
    sales: &[SalesRecord],
    config: &BacktestConfig,
    policies: &[Policy],
) -> Result<PolicyComparison> {
    if policies.is_empty() {
        return Err(Error::config("policy", "at least one policy is required"));
    }
    for (i, p) in policies.iter().enumerate() {
        if policies[..i].contains(p) {
            return Err(Error::config("policy", format!("{p} listed twice")));
        }
    }
    config.validate()?;
    // Validates the target week once for all policies.
    let first = run_backtest(sales, &BacktestConfig { policy: policies[0], ..config.clone() })?;
    let set = collect_windows(sales, config.target_week, config.window_weeks)?;
    let mut results = vec![first];
    for &policy in &policies[1..] {
        results.push(evaluate(&set, &BacktestConfig { policy, ..config.clone() })?);
    }
    Ok(PolicyComparison { results })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(cluster: &str, sku: &str, week: u32, units: u64) -> SalesRecord {
        SalesRecord {
            cluster_id: cluster.into(),
            sku_id: sku.into(),
            week,
            units,
        }
    }

    fn constant_world(c: u64, weeks: u32) -> Vec<SalesRecord> {
        let mut out = Vec::new();
        for cluster in ["FDC_1", "FDC_2"] {
            for sku in ["A", "B", "C"] {
                for w in 0..weeks {
                    out.push(rec(cluster, sku, w, c));
                }
            }
        }
        out
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!(matches!("armax".parse::<Policy>(), Err(Error::Config { field: "policy", .. })));
    }

    #[test]
    fn config_validation() {
        let mut cfg = BacktestConfig::new(9);
        assert!(cfg.validate().is_ok());
        cfg.window_weeks = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = BacktestConfig::new(9);
        cfg.r_values.clear();
        assert!(cfg.validate().is_err());
        cfg.r_values = vec![0.1, 0.0];
        assert!(matches!(cfg.validate(), Err(Error::Config { field: "r_values", .. })));
    }

    #[test]
    fn constant_sales_are_fully_served() {
        for c in [1, 5, 10] {
            let sales = constant_world(c, 10);
            let mut cfg = BacktestConfig::new(9);
            cfg.r_values = vec![0.025];
            let res = run_backtest(&sales, &cfg).unwrap();
            for row in &res.grid {
                assert_eq!(row[0].fi, Some(1.0), "c={c}");
            }
        }
    }

    #[test]
    fn all_zero_world() {
        let sales = constant_world(0, 10);
        let res = run_backtest(&sales, &BacktestConfig::new(9)).unwrap();
        assert_eq!(res.metadata.sku_count, 6);
        assert_eq!(res.metadata.ineligible_per_r, vec![6; 5]);
        for row in &res.grid {
            for m in row {
                assert_eq!(m.predicted_total, 0);
                assert_eq!((m.fi, m.ui), (None, None));
            }
        }
    }

    #[test]
    fn insufficient_history_names_earliest_week() {
        let sales = constant_world(3, 10);
        let err = run_backtest(&sales, &BacktestConfig::new(5)).unwrap_err();
        match err {
            Error::TargetWeekOutOfRange { earliest_usable, latest_usable, .. } => {
                assert_eq!(earliest_usable, 9);
                assert_eq!(latest_usable, 9);
            }
            other => panic!("{other:?}"),
        }
        assert!(run_backtest(&sales, &BacktestConfig::new(10)).is_err());
        assert!(run_backtest(&[], &BacktestConfig::new(10)).is_err());
    }

    #[test]
    fn missing_rows_are_zero_sales() {
        let mut sales = vec![rec("FDC_1", "A", 0, 4), rec("FDC_1", "A", 3, 8), rec("FDC_1", "A", 4, 2)];
        sales.push(rec("FDC_1", "B", 4, 1));
        let set = collect_windows(&sales, 4, 4).unwrap();
        assert_eq!(set.windows.len(), 1);
        assert_eq!(set.windows[0].window.weekly_sales, vec![4, 0, 0, 8]);
        assert_eq!(set.windows[0].realized, 2);
        // B has nothing inside the window.
        assert_eq!(set.skipped_skus, 1);
    }

    #[test]
    fn duplicate_records_rejected() {
        let sales = vec![rec("FDC_1", "A", 0, 4), rec("FDC_1", "A", 0, 5), rec("FDC_1", "A", 1, 5)];
        assert!(matches!(collect_windows(&sales, 1, 1), Err(Error::Input(_))));
    }

    #[test]
    fn baselines() {
        let sales = vec![
            rec("FDC_1", "A", 0, 1),
            rec("FDC_1", "A", 1, 2),
            rec("FDC_1", "A", 2, 6),
            rec("FDC_1", "A", 3, 4),
            rec("FDC_1", "B", 0, 0),
            rec("FDC_1", "B", 1, 1),
            rec("FDC_1", "B", 2, 0),
            rec("FDC_1", "B", 3, 0),
        ];
        let mut cfg = BacktestConfig::new(3);
        cfg.window_weeks = 3;
        cfg.r_values = vec![0.1];
        let cmp = run_policy_comparison(&sales, &cfg, &[Policy::NaiveLastWeek, Policy::WindowMean]).unwrap();
        let naive = &cmp.results[0].grid[0][0];
        // q = s: A gets 6, B gets 0; prev sold = 6.
        assert_eq!(naive.predicted_total, 6);
        assert_eq!(naive.ui, Some(1.0));
        let mean = &cmp.results[1].grid[0][0];
        // round(3.0) + round(1/3)
        assert_eq!(mean.predicted_total, 3);
        assert_eq!(mean.delivered_total, 3);
        assert_eq!(mean.ordered_total, 4);
    }

    #[test]
    fn comparison_rejects_duplicates() {
        let sales = constant_world(2, 10);
        let cfg = BacktestConfig::new(9);
        assert!(run_policy_comparison(&sales, &cfg, &[]).is_err());
        assert!(run_policy_comparison(&sales, &cfg, &[Policy::Newsboy, Policy::Newsboy]).is_err());
    }
}
