mod common;

use std::collections::HashSet;

use newsboy::backtest::{
    collect_windows, generate_world, generate_world_with_rates, run_backtest,
    run_policy_comparison, BacktestConfig, Policy, SyntheticWorld,
};
use newsboy::demand::poisson_cdf;
use newsboy::io::SalesRecord;
use newsboy::Error;

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
    for cluster in ["A", "B"] {
        for sku in ["x", "y", "z"] {
            for w in 0..weeks {
                out.push(rec(cluster, sku, w, c));
            }
        }
    }
    out
}

#[test]
fn constant_world_is_fully_served_at_small_r() {
    for c in [1u64, 5, 10] {
        let q = common::quantile_scan(c as f64, 1.0 - 0.025);
        assert!(q >= c, "c={c}: quantile {q}");
        assert!(poisson_cdf(q, c as f64).unwrap() >= 0.975);

        let mut cfg = BacktestConfig::new(9);
        cfg.r_values = vec![0.025];
        let res = run_backtest(&constant_world(c, 10), &cfg).unwrap();
        for row in &res.grid {
            assert_eq!(row[0].fi, Some(1.0), "c={c}");
            assert_eq!(row[0].predicted_total, 3 * q);
        }
    }
}

#[test]
fn all_zero_world_allocates_nothing() {
    let res = run_backtest(&constant_world(0, 10), &BacktestConfig::new(9)).unwrap();
    for row in &res.grid {
        for cell in row {
            assert_eq!(cell.predicted_total, 0);
            assert_eq!(cell.fi, None);
            assert_eq!(cell.ui, None);
        }
    }
    assert!(res.metadata.ineligible_per_r.iter().all(|&n| n == 6));
}

#[test]
fn insufficient_history_names_the_earliest_usable_week() {
    let err = run_backtest(&constant_world(3, 5), &BacktestConfig::new(4)).unwrap_err();
    match err {
        Error::TargetWeekOutOfRange { earliest_usable, .. } => assert_eq!(earliest_usable, 9),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn identical_inputs_give_identical_results() {
    let sales = generate_world(&SyntheticWorld::new(4, 50, 12, 3)).unwrap();
    let cfg = BacktestConfig::new(11);
    assert_eq!(run_backtest(&sales, &cfg).unwrap(), run_backtest(&sales, &cfg).unwrap());
}

#[test]
fn predicted_total_and_metrics_fall_with_r() {
    let sales = generate_world(&SyntheticWorld::new(6, 100, 12, 21)).unwrap();
    let res = run_backtest(&sales, &BacktestConfig::new(11)).unwrap();
    for row in &res.grid {
        for pair in row.windows(2) {
            assert!(pair[1].predicted_total <= pair[0].predicted_total);
            assert!(pair[1].ui.unwrap() <= pair[0].ui.unwrap());
            assert!(pair[1].fi.unwrap() <= pair[0].fi.unwrap());
        }
    }
}

#[test]
fn weeks_outside_the_window_have_no_effect() {
    let sales = generate_world(&SyntheticWorld::new(3, 40, 12, 8)).unwrap();
    let cfg = BacktestConfig::new(11);
    let base = run_backtest(&sales, &cfg).unwrap();

    // Sentinels before the window and after the target week.
    let mut noisy: Vec<SalesRecord> = sales
        .iter()
        .map(|r| if r.week == 1 || r.week == 12 { SalesRecord { units: r.units + 1000, ..r.clone() } } else { r.clone() })
        .collect();
    noisy.extend(sales.iter().filter(|r| r.week == 11).map(|r| SalesRecord { week: 12, units: 999, ..r.clone() }));
    let shifted = run_backtest(&noisy, &cfg).unwrap();
    assert_eq!(base.grid, shifted.grid);

    // Advancing the target by one reuses exactly window_weeks weeks.
    let mut appended = sales.clone();
    appended.extend(sales.iter().filter(|r| r.week == 11).map(|r| SalesRecord { week: 12, ..r.clone() }));
    let next = collect_windows(&appended, 12, 9).unwrap();
    for w in &next.windows {
        assert_eq!(w.window.weekly_sales.len(), 9);
    }
    let weeks_used: Vec<u64> = sales
        .iter()
        .filter(|r| r.cluster_id == next.windows[0].window.cluster_id && r.sku_id == next.windows[0].window.sku_id && (3..12).contains(&r.week))
        .map(|r| r.units)
        .collect();
    assert_eq!(next.windows[0].window.weekly_sales, weeks_used);
}

#[test]
fn deleting_zero_records_changes_nothing() {
    let sales = generate_world(&SyntheticWorld::new(3, 60, 12, 5)).unwrap();
    // SKUs with an all-zero window are skipped once their records vanish, so
    // only thin out SKUs that keep a sale inside weeks 2..=10.
    let active: HashSet<(&str, &str)> = sales
        .iter()
        .filter(|r| r.units > 0 && (2..=10).contains(&r.week))
        .map(|r| (r.cluster_id.as_str(), r.sku_id.as_str()))
        .collect();
    let sparse: Vec<SalesRecord> = sales
        .iter()
        .filter(|r| r.units > 0 || r.week == 0 || !active.contains(&(r.cluster_id.as_str(), r.sku_id.as_str())))
        .cloned()
        .collect();
    assert!(sparse.len() < sales.len());
    let cfg = BacktestConfig::new(11);
    let (a, b) = (run_backtest(&sales, &cfg).unwrap(), run_backtest(&sparse, &cfg).unwrap());
    assert_eq!(a.grid, b.grid);
    assert_eq!(a.metadata, b.metadata);
}

#[test]
fn baselines_follow_their_definitions() {
    let sales = vec![
        rec("A", "x", 0, 2),
        rec("A", "x", 1, 3),
        rec("A", "x", 2, 4),
        rec("A", "x", 3, 6),
    ];
    let mut cfg = BacktestConfig::new(3);
    cfg.window_weeks = 3;
    cfg.r_values = vec![0.1];
    let cmp = run_policy_comparison(&sales, &cfg, &[Policy::NaiveLastWeek, Policy::WindowMean]).unwrap();
    let naive = &cmp.results[0].grid[0][0];
    let mean = &cmp.results[1].grid[0][0];
    assert_eq!(naive.predicted_total, 4);
    assert_eq!(naive.ui, Some(1.0));
    assert_eq!(mean.predicted_total, 3);
    assert_eq!(mean.fi, Some(0.5));
}

#[test]
fn newsboy_beats_last_week_baseline_on_fill() {
    let mut wins = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let sales = generate_world(&SyntheticWorld::new(12, 200, 12, 100 + seed)).unwrap();
        let mut cfg = BacktestConfig::new(11);
        cfg.r_values = vec![0.1];
        let cmp = run_policy_comparison(&sales, &cfg, &[Policy::Newsboy, Policy::NaiveLastWeek]).unwrap();
        let fi = |i: usize| cmp.results[i].grid.iter().map(|row| row[0].fi.unwrap()).sum::<f64>();
        if fi(0) >= fi(1) {
            wins += 1;
        }
    }
    assert_eq!(wins, seeds);
}

#[test]
fn synthetic_sales_track_their_true_rates() {
    let world = SyntheticWorld::new(1, 30, 500, 17);
    let (sales, rates) = generate_world_with_rates(&world).unwrap();
    for (k, lambda) in rates.iter().enumerate() {
        let total: u64 = sales.iter().skip(k * 500).take(500).map(|r| r.units).sum();
        let mean = total as f64 / 500.0;
        assert!((mean - lambda).abs() <= 4.0 * (lambda / 500.0).sqrt(), "sku {k}: {mean} vs {lambda}");
    }
    assert_eq!(generate_world(&world).unwrap(), sales);
    assert!(generate_world(&SyntheticWorld::new(0, 5, 5, 1)).unwrap().is_empty());
}
