use serde::{Deserialize, Serialize};

use crate::demand::ContinuousDensity;
use crate::error::{Error, Result};
use crate::numeric::{bisect, Bracket};

use super::{objective_derivative, AllocationParams};

/// Bracket expansion gives up past this multiple of the density's upper bound.
const EXPANSION_LIMIT: f64 = 1e3;
const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSolution {
    pub q_star: f64,
    /// `a′(q*)`, which should vanish.
    pub derivative: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
}

/// Root of `a′(q) = 0` by bisection, starting the bracket search at the median.
pub fn solve_continuous(params: &AllocationParams<ContinuousDensity>) -> Result<ContinuousSolution> {
    solve_continuous_from(params, params.demand().median())
}

/// As [`solve_continuous`], with the bracket search starting at `start`.
///
/// The bracket grows geometrically from `start` until `a′` changes sign, then
/// bisection runs until the interval is below `1e−9·max(1, q)`.
pub fn solve_continuous_from(
    params: &AllocationParams<ContinuousDensity>,
    start: f64,
) -> Result<ContinuousSolution> {
    if params.s() == 0 {
        return Err(Error::Input("continuous solver needs s > 0".into()));
    }
    if !(start > 0.0) || !start.is_finite() {
        return Err(Error::Domain(format!("bracket start must be positive, got {start}")));
    }
    let density = params.demand();
    let ratio = params.r() / params.s() as f64;
    let reciprocal_mean = density.reciprocal_mean();
    if ratio >= reciprocal_mean {
        return Err(Error::NoInteriorSolution {
            ratio,
            reciprocal_mean,
        });
    }

    let derivative = |q: f64| objective_derivative(q, params);
    let at_start = derivative(start)?;
    if at_start == 0.0 {
        return Ok(ContinuousSolution {
            q_star: start,
            derivative: 0.0,
            bracket_lo: start,
            bracket_hi: start,
        });
    }

    let bracket = if at_start > 0.0 {
        let limit = EXPANSION_LIMIT * density.upper_bound();
        let (mut lo, mut hi) = (start, 2.0 * start);
        while derivative(hi)? > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > limit {
                return Err(Error::numeric(
                    "solve_continuous",
                    format!("upper bracket passed {limit:e} with a′ still positive"),
                ));
            }
        }
        Bracket { lo, hi }
    } else {
        let (mut lo, mut hi) = (0.5 * start, start);
        while derivative(lo)? <= 0.0 {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Err(Error::numeric(
                    "solve_continuous",
                    format!("lower bracket underflowed with a′ still non-positive (r/s = {ratio})"),
                ));
            }
        }
        Bracket { lo, hi }
    };

    let q_star = bisect(
        derivative,
        bracket,
        |lo, hi, _| hi - lo < 1e-9 * hi.max(1.0),
        MAX_BISECTIONS,
    )?;
    Ok(ContinuousSolution {
        q_star,
        derivative: derivative(q_star)?,
        bracket_lo: bracket.lo,
        bracket_hi: bracket.hi,
    })
}
