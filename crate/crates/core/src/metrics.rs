//! Fulfilment Index and Utilization Index.
//!
//! Counts are units, not distinct SKUs. Cluster figures are ratios of unit
//! totals; a zero denominator yields `None`, never 0 or 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One SKU's week at one cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeekOutcome {
    pub cluster_id: String,
    pub sku_id: String,
    pub ordered_units: u64,
    pub allocated_units: u64,
    pub prev_week_sold_units: u64,
}

impl WeekOutcome {
    pub fn delivered_units(&self) -> u64 {
        self.allocated_units.min(self.ordered_units)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMetrics {
    pub cluster_id: String,
    pub fi: Option<f64>,
    pub ui: Option<f64>,
    pub delivered_total: u64,
    pub ordered_total: u64,
    pub predicted_total: u64,
    pub prev_sold_total: u64,
}

impl ClusterMetrics {
    /// Metrics from unit totals.
    pub fn from_totals(
        cluster_id: impl Into<String>,
        delivered_total: u64,
        ordered_total: u64,
        predicted_total: u64,
        prev_sold_total: u64,
    ) -> Self {
        Self {
            cluster_id: cluster_id.into(),
            fi: ratio(delivered_total, ordered_total),
            ui: ratio(predicted_total, prev_sold_total),
            delivered_total,
            ordered_total,
            predicted_total,
            prev_sold_total,
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `min(allocated, ordered) / ordered`.
pub fn sku_fi(outcome: &WeekOutcome) -> Option<f64> {
    ratio(outcome.delivered_units(), outcome.ordered_units)
}

/// `allocated / prev_week_sold`.
pub fn sku_ui(outcome: &WeekOutcome) -> Option<f64> {
    ratio(outcome.allocated_units, outcome.prev_week_sold_units)
}

/// Aggregate one cluster's outcomes as ratios of unit sums.
pub fn cluster_metrics(cluster_id: &str, outcomes: &[WeekOutcome]) -> Result<ClusterMetrics> {
    if let Some(stray) = outcomes.iter().find(|o| o.cluster_id != cluster_id) {
        return Err(Error::Input(format!(
            "outcome for sku {} belongs to cluster {}, expected {cluster_id}",
            stray.sku_id, stray.cluster_id
        )));
    }
    let (mut delivered, mut ordered, mut predicted, mut prev) = (0u64, 0u64, 0u64, 0u64);
    for o in outcomes {
        delivered += o.delivered_units();
        ordered += o.ordered_units;
        predicted += o.allocated_units;
        prev += o.prev_week_sold_units;
    }
    Ok(ClusterMetrics::from_totals(
        cluster_id, delivered, ordered, predicted, prev,
    ))
}

/// Mean of the defined values, or `None` if there are none.
pub fn mean_defined<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn outcome(sku: &str, ordered: u64, allocated: u64, prev: u64) -> WeekOutcome {
        WeekOutcome {
            cluster_id: "FDC_1".into(),
            sku_id: sku.into(),
            ordered_units: ordered,
            allocated_units: allocated,
            prev_week_sold_units: prev,
        }
    }

    #[test]
    fn sku_level() {
        assert_eq!(sku_fi(&outcome("a", 10, 7, 1)), Some(0.7));
        assert_eq!(sku_fi(&outcome("a", 7, 10, 1)), Some(1.0));
        assert_eq!(sku_fi(&outcome("a", 0, 3, 1)), None);
        assert_eq!(sku_ui(&outcome("a", 1, 5, 5)), Some(1.0));
        assert_eq!(sku_ui(&outcome("a", 1, 2, 4)), Some(0.5));
        assert_eq!(sku_ui(&outcome("a", 1, 2, 0)), None);
    }

    #[test]
    fn cluster_is_ratio_of_sums() {
        let m = cluster_metrics("FDC_1", &[outcome("a", 10, 7, 4), outcome("b", 10, 0, 4)]).unwrap();
        assert_eq!(m.fi, Some(0.35));
        assert_eq!(m.delivered_total, 7);
        assert_eq!(m.ordered_total, 20);

        let m = cluster_metrics("FDC_1", &[outcome("a", 1, 5, 4), outcome("b", 1, 3, 4)]).unwrap();
        assert_eq!(m.ui, Some(1.0));
    }

    #[test]
    fn weighting_differs_from_mean_of_ratios() {
        // SKU ratios 1.0 and 0.1 average to 0.55; units give 11/101.
        let outcomes = [outcome("a", 1, 1, 1), outcome("b", 100, 10, 1)];
        let m = cluster_metrics("FDC_1", &outcomes).unwrap();
        assert_eq!(m.fi, Some(11.0 / 101.0));
        let unweighted = mean_defined(outcomes.iter().map(sku_fi)).unwrap();
        assert!((unweighted - 0.55).abs() < 1e-15);
    }

    #[test]
    fn empty_cluster() {
        let m = cluster_metrics("FDC_1", &[]).unwrap();
        assert_eq!(m, ClusterMetrics::from_totals("FDC_1", 0, 0, 0, 0));
        assert_eq!((m.fi, m.ui), (None, None));
    }

    #[test]
    fn mixed_clusters_rejected() {
        let mut other = outcome("b", 1, 1, 1);
        other.cluster_id = "FDC_2".into();
        assert!(matches!(
            cluster_metrics("FDC_1", &[outcome("a", 1, 1, 1), other]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn mean_defined_skips_undefined() {
        assert_eq!(mean_defined([Some(1.0), None, Some(0.5)]), Some(0.75));
        assert_eq!(mean_defined([None, None]), None);
    }

    fn outcomes_strategy() -> impl Strategy<Value = Vec<WeekOutcome>> {
        prop::collection::vec((0u64..50, 0u64..50, 0u64..50), 0..20).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (o, a, p))| outcome(&format!("s{i}"), o, a, p))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn bounds(outcomes in outcomes_strategy()) {
            let m = cluster_metrics("FDC_1", &outcomes).unwrap();
            if let Some(fi) = m.fi { prop_assert!((0.0..=1.0).contains(&fi)); }
            if let Some(ui) = m.ui { prop_assert!(ui >= 0.0); }
        }

        #[test]
        fn fi_monotone_in_allocation(outcomes in outcomes_strategy(), pick in 0usize..20, extra in 1u64..20) {
            prop_assume!(!outcomes.is_empty());
            let i = pick % outcomes.len();
            let before = cluster_metrics("FDC_1", &outcomes).unwrap();
            let mut more = outcomes.clone();
            more[i].allocated_units += extra;
            let after = cluster_metrics("FDC_1", &more).unwrap();
            if let (Some(b), Some(a)) = (before.fi, after.fi) { prop_assert!(a >= b); }
        }

        #[test]
        fn scale_invariant(outcomes in outcomes_strategy(), k in 1u64..7) {
            let scaled: Vec<_> = outcomes.iter().map(|o| WeekOutcome {
                ordered_units: o.ordered_units * k,
                allocated_units: o.allocated_units * k,
                prev_week_sold_units: o.prev_week_sold_units * k,
                ..o.clone()
            }).collect();
            let a = cluster_metrics("FDC_1", &outcomes).unwrap();
            let b = cluster_metrics("FDC_1", &scaled).unwrap();
            prop_assert_eq!(a.fi, b.fi);
            prop_assert_eq!(a.ui, b.ui);
        }
    }
}
