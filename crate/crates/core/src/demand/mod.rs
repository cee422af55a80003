//! Demand models: Poisson machinery, maximum-likelihood fitting from weekly
//! sales windows, and continuous densities for the general optimality condition.

mod continuous;
mod poisson;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use continuous::{
    continuous_reciprocal_tail, reciprocal_tail_integral, ContinuousDensity, UPPER_TAIL_MASS,
};
pub use poisson::{
    poisson_cdf, poisson_pmf, poisson_quantile, poisson_reciprocal_tail, LogFactorials, Poisson,
    ReciprocalTail, DEFAULT_LOG_FACTORIAL_CAP, TAIL_TRUNCATION,
};

/// Dense week index. Calendar labels are mapped onto it by the I/O layer.
pub type WeekIndex = u32;

/// Consecutive weekly sales of one SKU in one cluster, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SalesWindow {
    pub cluster_id: String,
    pub sku_id: String,
    pub weekly_sales: Vec<u64>,
    /// The week being planned for; the window ends the week before it.
    pub target_week: WeekIndex,
}

impl SalesWindow {
    pub fn new(
        cluster_id: impl Into<String>,
        sku_id: impl Into<String>,
        weekly_sales: Vec<u64>,
        target_week: WeekIndex,
    ) -> Self {
        Self {
            cluster_id: cluster_id.into(),
            sku_id: sku_id.into(),
            weekly_sales,
            target_week,
        }
    }

    /// Sales in the week right before the target week.
    pub fn last_week_sales(&self) -> Option<u64> {
        self.weekly_sales.last().copied()
    }
}

/// Fitted Poisson demand for one (cluster, SKU).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonDemandModel {
    pub cluster_id: String,
    pub sku_id: String,
    pub lambda_hat: f64,
    pub n_samples: usize,
}

impl PoissonDemandModel {
    /// No sales in the whole window; such SKUs never receive an allocation.
    pub fn is_degenerate(&self) -> bool {
        self.lambda_hat == 0.0
    }

    /// `None` for degenerate models.
    pub fn distribution(&self) -> Option<Poisson> {
        Poisson::new(self.lambda_hat).ok()
    }
}

/// Maximum-likelihood Poisson fit: the sample mean of the window.
pub fn fit_poisson_mle(window: &SalesWindow) -> Result<PoissonDemandModel> {
    if window.weekly_sales.is_empty() {
        return Err(Error::Input(format!(
            "empty sales window for cluster {} sku {}",
            window.cluster_id, window.sku_id
        )));
    }
    let n = window.weekly_sales.len();
    let total: u64 = window.weekly_sales.iter().sum();
    Ok(PoissonDemandModel {
        cluster_id: window.cluster_id.clone(),
        sku_id: window.sku_id.clone(),
        lambda_hat: total as f64 / n as f64,
        n_samples: n,
    })
}
