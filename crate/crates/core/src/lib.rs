//! Newsboy-model stock allocation for forward deployment centers.
//!
//! Weekly SKU demand at each cluster is modelled as Poisson with rate equal to
//! the mean of a trailing sales window. Each SKU receives the quantity that
//! maximizes expected fulfilment minus `r` times utilization against last
//! week's sales, which is the demand quantile at `1 − r·λ̂/s`.
//!
//! * [`demand`]: Poisson pmf/cdf/quantile, MLE fitting, continuous densities.
//! * [`allocator`]: the objective, its optimality condition, and batch allocation.
//! * [`metrics`]: Fulfilment Index and Utilization Index.
//! * [`backtest`]: rolling-window evaluation, r-sweeps, baselines, synthetic worlds.
//! * [`io`]: sales CSV ingestion, report rendering and the CLI commands.

pub mod allocator;
pub mod backtest;
pub mod demand;
mod error;
pub mod io;
pub mod metrics;
pub mod numeric;

pub use error::{Error, Result};
