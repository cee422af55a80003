//! Continuous demand densities on (0, ∞) and their reciprocal tail integral.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate, Bracket, Integral, QuadratureOptions};

/// Upper-tail mass beyond `upper_bound()`.
pub const UPPER_TAIL_MASS: f64 = 1e-12;

/// A demand density with support in (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ContinuousDensity {
    LogNormal { mu: f64, sigma: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl ContinuousDensity {
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(ContinuousDensity::LogNormal { mu, sigma })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && rate.is_finite() && shape > 0.0 && rate > 0.0) {
            return Err(Error::Domain(format!(
                "gamma needs shape > 0 and rate > 0, got ({shape}, {rate})"
            )));
        }
        Ok(ContinuousDensity::Gamma { shape, rate })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_infinite() {
            return 0.0;
        }
        match *self {
            ContinuousDensity::LogNormal { mu, sigma } => {
                let z = (x.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (x * sigma * (2.0 * PI).sqrt())
            }
            ContinuousDensity::Gamma { shape, rate } => {
                (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        match *self {
            ContinuousDensity::LogNormal { mu, sigma } => {
                0.5 * erfc(-(x.ln() - mu) / (sigma * SQRT_2))
            }
            ContinuousDensity::Gamma { shape, rate } => gamma_lr(shape, rate * x),
        }
    }

    /// `1 − cdf(x)` without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x.is_infinite() {
            return 0.0;
        }
        match *self {
            ContinuousDensity::LogNormal { mu, sigma } => {
                0.5 * erfc((x.ln() - mu) / (sigma * SQRT_2))
            }
            ContinuousDensity::Gamma { shape, rate } => gamma_ur(shape, rate * x),
        }
    }

    pub fn median(&self) -> f64 {
        match *self {
            ContinuousDensity::LogNormal { mu, .. } => mu.exp(),
            ContinuousDensity::Gamma { .. } => self
                .invert_sf(0.5)
                .expect("gamma median lies inside a finite bracket"),
        }
    }

    /// The `1 − 1e−12` quantile: beyond it the density carries negligible mass.
    pub fn upper_bound(&self) -> f64 {
        match *self {
            ContinuousDensity::LogNormal { mu, sigma } => {
                // Φ^{-1}(1 − 1e−12) = 7.034483825301131
                (mu + sigma * 7.034_483_825_301_131).exp()
            }
            ContinuousDensity::Gamma { .. } => self
                .invert_sf(UPPER_TAIL_MASS)
                .expect("gamma tail quantile lies inside a finite bracket"),
        }
    }

    /// `E[1/D]`; infinite when the reciprocal moment diverges.
    pub fn reciprocal_mean(&self) -> f64 {
        match *self {
            ContinuousDensity::LogNormal { mu, sigma } => (-mu + 0.5 * sigma * sigma).exp(),
            ContinuousDensity::Gamma { shape, rate } => {
                if shape > 1.0 {
                    rate / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Solve `sf(x) = mass` by bisection in log space.
    fn invert_sf(&self, mass: f64) -> Result<f64> {
        let g = |t: f64| Ok(self.sf(t.exp()).ln() - mass.ln());
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        while g(lo)? <= 0.0 {
            lo -= 8.0;
            if lo < -700.0 {
                return Err(Error::numeric("invert_sf", "lower bracket underflowed"));
            }
        }
        while g(hi)? > 0.0 {
            hi += 8.0;
            if hi > 700.0 {
                return Err(Error::numeric("invert_sf", "upper bracket overflowed"));
            }
        }
        let t = bisect(g, Bracket { lo, hi }, |lo, hi, _| hi - lo < 1e-13, 200)?;
        Ok(t.exp())
    }
}

/// `∫_q^U f(x)/x dx`, integrated in `t = ln x` where the integrand becomes `f(e^t)`.
pub fn continuous_reciprocal_tail(density: &ContinuousDensity, q: f64) -> Result<f64> {
    Ok(reciprocal_tail_integral(density, q)?.value.max(0.0))
}

/// As [`continuous_reciprocal_tail`], keeping the quadrature diagnostics.
pub fn reciprocal_tail_integral(density: &ContinuousDensity, q: f64) -> Result<Integral> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!(
            "reciprocal tail needs a finite q > 0, got {q}"
        )));
    }
    let upper = density.upper_bound();
    if q >= upper {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }
    let opts = QuadratureOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        max_subdivisions: 2000,
    };
    integrate(|t| density.pdf(t.exp()), q.ln(), upper.ln(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constructors_validate() {
        assert!(ContinuousDensity::lognormal(0.0, 0.0).is_err());
        assert!(ContinuousDensity::gamma(-1.0, 1.0).is_err());
        assert!(ContinuousDensity::gamma(2.0, f64::NAN).is_err());
    }

    #[test]
    fn cdf_and_sf_are_complementary() {
        let ds = [
            ContinuousDensity::lognormal(0.0, 1.0).unwrap(),
            ContinuousDensity::gamma(2.0, 1.0).unwrap(),
            ContinuousDensity::gamma(0.7, 3.0).unwrap(),
        ];
        for d in ds {
            assert_eq!(d.cdf(0.0), 0.0);
            assert_eq!(d.cdf(f64::INFINITY), 1.0);
            let mut prev = 0.0;
            for i in 1..200 {
                let x = i as f64 * 0.05;
                let c = d.cdf(x);
                assert!(c >= prev);
                assert!((c + d.sf(x) - 1.0).abs() < 1e-14);
                assert!(d.pdf(x) >= 0.0);
                prev = c;
            }
        }
    }

    #[test]
    fn gamma_pdf_closed_form() {
        let d = ContinuousDensity::gamma(2.0, 1.0).unwrap();
        for x in [0.1, 1.0, 3.5] {
            assert_relative_eq!(d.pdf(x), x * (-x).exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn upper_bounds_carry_the_stated_mass() {
        let ln = ContinuousDensity::lognormal(0.3, 0.8).unwrap();
        assert_relative_eq!(ln.sf(ln.upper_bound()), UPPER_TAIL_MASS, max_relative = 1e-6);
        let g = ContinuousDensity::gamma(2.0, 1.0).unwrap();
        assert_relative_eq!(g.sf(g.upper_bound()), UPPER_TAIL_MASS, max_relative = 1e-8);
        assert_relative_eq!(g.cdf(g.median()), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn tail_beyond_support_is_zero() {
        let d = ContinuousDensity::lognormal(0.0, 1.0).unwrap();
        assert_eq!(continuous_reciprocal_tail(&d, d.upper_bound() * 1.5).unwrap(), 0.0);
    }

    #[test]
    fn tail_rejects_non_positive_q() {
        let d = ContinuousDensity::gamma(2.0, 1.0).unwrap();
        assert!(matches!(continuous_reciprocal_tail(&d, 0.0), Err(Error::Domain(_))));
        assert!(matches!(continuous_reciprocal_tail(&d, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_two_tail_is_exponential() {
        // f(x)/x = e^{-x} for Gamma(2, 1).
        let d = ContinuousDensity::gamma(2.0, 1.0).unwrap();
        let upper = d.upper_bound();
        for q in [1e-6f64, 0.3, 1.0, 4.0, 12.0] {
            let expect = (-q).exp() - (-upper).exp();
            assert_relative_eq!(continuous_reciprocal_tail(&d, q).unwrap(), expect, max_relative = 1e-10);
        }
    }
}
