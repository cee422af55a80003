//! Stock allocation from the FI/UI objective.
//!
//! The objective for a quantity `q` is `a(q) = E[min(q, D)/D] − r·q/s`: the
//! expected fulfilment of the SKU minus `r` times its utilization against last
//! week's sales `s`. Its derivative is `∫_q^∞ f(x)/x dx − r/s`, which is
//! strictly decreasing, so the stationary point is the unique maximizer.
//! Under Poisson demand that point has the closed form
//! `q* = F⁻¹(1 − r·λ/s)`, defined only when `r·λ < s`.

mod continuous;
mod objective;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::{fit_poisson_mle, PoissonDemandModel, SalesWindow};
use crate::error::{Error, Result};

pub use continuous::{solve_continuous, solve_continuous_from, ContinuousSolution};
pub use objective::{objective, objective_derivative, ExpectedFulfilment};

/// Largest accepted FI/UI trade-off weight.
pub const MAX_R: f64 = 10.0;

/// Reject `r` outside `(0, MAX_R]`.
pub fn validate_r(r: f64) -> Result<f64> {
    if r.is_finite() && r > 0.0 && r <= MAX_R {
        Ok(r)
    } else {
        Err(Error::config(
            "r",
            format!("must lie in (0, {MAX_R}], got {r}"),
        ))
    }
}

/// Inputs to the allocation objective for one SKU.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationParams<D> {
    r: f64,
    s: u64,
    demand: D,
}

impl<D> AllocationParams<D> {
    pub fn new(r: f64, s: u64, demand: D) -> Result<Self> {
        Ok(Self {
            r: validate_r(r)?,
            s,
            demand,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Last-week sales.
    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn demand(&self) -> &D {
        &self.demand
    }
}

/// Recommended quantity for one (cluster, SKU).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationDecision {
    pub cluster_id: String,
    pub sku_id: String,
    pub q_star: u64,
    pub eligible: bool,
    /// `1 − r·λ̂/s`, present only for eligible SKUs.
    pub fractile: Option<f64>,
    pub lambda_hat: f64,
    pub s: u64,
    pub r: f64,
}

/// `r·λ̂ < s` with `s > 0` and `λ̂ > 0`: the fractile `1 − r·λ̂/s` lies in (0, 1).
pub fn is_eligible(lambda_hat: f64, s: u64, r: f64) -> bool {
    // The fused r·λ̂ − s is rounded once, so its sign is exact even at the boundary.
    lambda_hat > 0.0 && s > 0 && r.mul_add(lambda_hat, -(s as f64)) < 0.0
}

/// Largest double below 1; the quantile is undefined at 1 itself.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Closed-form Poisson allocation `q* = F⁻¹(1 − r·λ̂/s)`. Ineligible SKUs get `q* = 0`.
pub fn solve_poisson_closed_form(params: &AllocationParams<PoissonDemandModel>) -> AllocationDecision {
    let model = params.demand();
    let (r, s) = (params.r(), params.s());
    let mut decision = AllocationDecision {
        cluster_id: model.cluster_id.clone(),
        sku_id: model.sku_id.clone(),
        q_star: 0,
        eligible: false,
        fractile: None,
        lambda_hat: model.lambda_hat,
        s,
        r,
    };
    if !is_eligible(model.lambda_hat, s, r) {
        return decision;
    }
    let dist = model
        .distribution()
        .expect("eligible models have a positive rate");
    let s_units = s as f64;
    // (s − r·λ̂)/s with a fused numerator stays positive whenever r·λ̂ < s.
    let fractile = ((-r).mul_add(model.lambda_hat, s_units) / s_units).min(BELOW_ONE);
    decision.q_star = dist
        .quantile(fractile)
        .expect("eligible fractile lies in (0, 1)");
    decision.eligible = true;
    decision.fractile = Some(fractile);
    decision
}

/// A window that could not be fitted, reported instead of aborting the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationFailure {
    /// Position of the window in the input.
    pub index: usize,
    pub cluster_id: String,
    pub sku_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AllocationBatch {
    /// Input order, minus failed windows.
    pub decisions: Vec<AllocationDecision>,
    pub failures: Vec<AllocationFailure>,
}

fn allocate_one(window: &SalesWindow, r: f64) -> Result<AllocationDecision> {
    let model = fit_poisson_mle(window)?;
    let s = window
        .last_week_sales()
        .expect("fitted windows are non-empty");
    Ok(solve_poisson_closed_form(&AllocationParams::new(r, s, model)?))
}

/// Fit each window and allocate it with the closed form.
///
/// Windows are processed in parallel; the output order always matches the input.
pub fn allocate(windows: &[SalesWindow], r: f64) -> Result<AllocationBatch> {
    let r = validate_r(r)?;
    let results: Vec<Result<AllocationDecision>> =
        windows.par_iter().map(|w| allocate_one(w, r)).collect();
    let mut batch = AllocationBatch::default();
    for (index, (window, result)) in windows.iter().zip(results).enumerate() {
        match result {
            Ok(d) => batch.decisions.push(d),
            Err(e) => batch.failures.push(AllocationFailure {
                index,
                cluster_id: window.cluster_id.clone(),
                sku_id: window.sku_id.clone(),
                message: e.to_string(),
            }),
        }
    }
    Ok(batch)
}
