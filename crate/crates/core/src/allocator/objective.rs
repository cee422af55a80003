use crate::demand::{continuous_reciprocal_tail, ContinuousDensity, PoissonDemandModel};
use crate::error::{Error, Result};

use super::AllocationParams;

/// `E[min(q, D)/D]` for a demand law. Weeks with zero demand count as fully served.
pub trait ExpectedFulfilment {
    fn expected_fulfilment(&self, q: f64) -> Result<f64>;
}

impl ExpectedFulfilment for PoissonDemandModel {
    fn expected_fulfilment(&self, q: f64) -> Result<f64> {
        match self.distribution() {
            Some(dist) => Ok(dist.expected_fill_rate(q)),
            // D ≡ 0
            None => Ok(1.0),
        }
    }
}

impl ExpectedFulfilment for ContinuousDensity {
    /// `F(q) + q·∫_q^∞ f(x)/x dx`.
    fn expected_fulfilment(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            return Ok(0.0);
        }
        Ok(self.cdf(q) + q * continuous_reciprocal_tail(self, q)?)
    }
}

fn check_quantity(q: f64, s: u64) -> Result<()> {
    if s == 0 {
        return Err(Error::Input(
            "objective is undefined when last-week sales s = 0".into(),
        ));
    }
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("quantity must be finite and >= 0, got {q}")));
    }
    Ok(())
}

/// `a(q) = E[min(q, D)/D] − r·q/s`.
pub fn objective<D: ExpectedFulfilment>(q: f64, params: &AllocationParams<D>) -> Result<f64> {
    check_quantity(q, params.s())?;
    let fill = params.demand().expected_fulfilment(q)?;
    Ok(fill - params.r() * q / params.s() as f64)
}

/// `a′(q) = ∫_q^∞ f(x)/x dx − r/s`.
pub fn objective_derivative(q: f64, params: &AllocationParams<ContinuousDensity>) -> Result<f64> {
    check_quantity(q, params.s())?;
    let tail = continuous_reciprocal_tail(params.demand(), q)?;
    Ok(tail - params.r() / params.s() as f64)
}
